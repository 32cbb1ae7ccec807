#include "run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "depthsr/error.hpp"

namespace depthsr::cli {

namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos == v.size()) return x;
  } catch (const std::exception&) {
  }
  detail::fail(key + ": expected an integer, got '" + v + "'");
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos == v.size()) return x;
  } catch (const std::exception&) {
  }
  detail::fail(key + ": expected a number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  detail::fail(key + ": expected true or false, got '" + v + "'");
}

int to_i(const std::string& key, const std::string& v) { return static_cast<int>(to_int(key, v)); }

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  DEPTHSR_REQUIRE(x >= 0, key + ": must be >= 0");
  return static_cast<std::uint64_t>(x);
}

const std::vector<std::pair<std::string, Setter>>& schema() {
  static const std::vector<std::pair<std::string, Setter>> s = {
      {"data.scale", [](RunConfig& c, const std::string& v) { c.train.scale = to_i("data.scale", v); }},
      {"data.patch", [](RunConfig& c, const std::string& v) { c.patch = to_i("data.patch", v); }},
      {"data.stride", [](RunConfig& c, const std::string& v) { c.stride = to_i("data.stride", v); }},
      {"data.rot90", [](RunConfig& c, const std::string& v) { c.rot90 = to_bool("data.rot90", v); }},
      {"data.unit_scale", [](RunConfig& c, const std::string& v) { c.unit_scale = to_real("data.unit_scale", v); }},
      {"network.levels", {}},
      {"network.base_channels", {}},
      {"network.dense_layers", {}},
      {"network.dense_growth", {}},
      {"network.transition_channels", {}},
      {"network.depth_channels", {}},
      {"network.decoder_channels", {}},
      {"network.upsample_mode", {}},
      {"network.residual", {}},
      {"network.seed", {}},
      {"train.learning_rate",
       [](RunConfig& c, const std::string& v) { c.train.learning_rate = to_real("train.learning_rate", v); }},
      {"train.batch_size", [](RunConfig& c, const std::string& v) { c.train.batch_size = to_i("train.batch_size", v); }},
      {"train.epochs", [](RunConfig& c, const std::string& v) { c.train.epochs = to_i("train.epochs", v); }},
      {"train.max_steps", [](RunConfig& c, const std::string& v) { c.train.max_steps = to_i("train.max_steps", v); }},
      {"train.seed", [](RunConfig& c, const std::string& v) { c.train.seed = to_seed("train.seed", v); }},
      {"train.checkpoint_every",
       [](RunConfig& c, const std::string& v) { c.train.checkpoint_every = to_i("train.checkpoint_every", v); }},
      {"train.precision", [](RunConfig& c, const std::string& v) { c.train.precision = parse_precision(v); }},
      {"train.threads", [](RunConfig& c, const std::string& v) { c.train.threads = to_i("train.threads", v); }},
      {"loss.lambda1", [](RunConfig& c, const std::string& v) { c.train.loss_weights.lambda1 = to_real("loss.lambda1", v); }},
      {"loss.lambda2", [](RunConfig& c, const std::string& v) { c.train.loss_weights.lambda2 = to_real("loss.lambda2", v); }},
      {"loss.lambda3", [](RunConfig& c, const std::string& v) { c.train.loss_weights.lambda3 = to_real("loss.lambda3", v); }},
      {"eval.method", [](RunConfig& c, const std::string& v) { c.method = v; }},
      {"eval.gf_radius", [](RunConfig& c, const std::string& v) { c.gf_radius = to_i("eval.gf_radius", v); }},
      {"eval.gf_eps", [](RunConfig& c, const std::string& v) { c.gf_eps = to_real("eval.gf_eps", v); }},
      {"eval.report_scale", [](RunConfig& c, const std::string& v) { c.report_scale = to_real("eval.report_scale", v); }},
  };
  return s;
}

}  // namespace

void RunConfig::validate() const {
  network.validate();
  train.validate();
  DEPTHSR_REQUIRE(patch >= 1, "data.patch must be >= 1");
  DEPTHSR_REQUIRE(stride >= 1, "data.stride must be >= 1");
  DEPTHSR_REQUIRE(unit_scale > 0.0, "data.unit_scale must be positive");
  DEPTHSR_REQUIRE(method == "mpfn" || method == "bicubic" || method == "gf",
                  "eval.method must be mpfn, bicubic or gf, got '" + method + "'");
  DEPTHSR_REQUIRE(gf_radius >= 1, "eval.gf_radius must be >= 1");
  DEPTHSR_REQUIRE(gf_eps > 0.0, "eval.gf_eps must be positive");
  DEPTHSR_REQUIRE(report_scale > 0.0, "eval.report_scale must be positive");
}

std::vector<std::string> config_schema() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : schema()) keys.push_back(k);
  return keys;
}

RunConfig parse_run_config_text(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    detail::fail(std::string("config syntax error: ") + e.what());
  }
  std::map<std::string, Setter> setters(schema().begin(), schema().end());

  RunConfig cfg;
  std::ostringstream network_text;
  for (const auto& [section, body] : tree) {
    DEPTHSR_REQUIRE(!body.empty() || body.data().empty(), "config key '" + section + "' is outside any section");
    DEPTHSR_REQUIRE(section == "data" || section == "network" || section == "train" || section == "loss" ||
                        section == "eval",
                    "unknown config section '" + section + "'");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = setters.find(full);
      DEPTHSR_REQUIRE(it != setters.end(), "unknown config key '" + full + "'");
      const std::string v = value.data();
      if (section == "network") {
        network_text << key << " = " << v << "\n";
      } else {
        it->second(cfg, v);
      }
      cfg.keys_from_file.push_back(full);
    }
  }
  cfg.network = NetworkConfig::parse(network_text.str());
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  DEPTHSR_REQUIRE(in.good(), "cannot read config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_run_config_text(os.str());
}

}  // namespace depthsr::cli
