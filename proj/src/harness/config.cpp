#include "sliced/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace sliced::harness {

namespace {

std::string trim(const std::string& s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value)
{
  throw std::invalid_argument("config: bad value '" + value + "' for key '" + key + "'");
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& value)
{
  Int out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) bad_value(key, value);
  return out;
}

double parse_double(const std::string& key, const std::string& value)
{
  if (value.empty()) bad_value(key, value);
  char* end = nullptr;
  const double out = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size()) bad_value(key, value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value)
{
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

std::vector<Eigen::Index> parse_widths(const std::string& key, const std::string& value)
{
  std::vector<Eigen::Index> widths;
  if (value.empty() || value == "none") return widths;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) widths.push_back(parse_int<Eigen::Index>(key, trim(item)));
  return widths;
}

// Shortest text that parses back to the same double.
std::string format_double(double v)
{
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, v);
  return std::string(buffer, result.ptr);
}

std::string format_widths(const std::vector<Eigen::Index>& widths)
{
  if (widths.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < widths.size(); ++i) out += (i ? "," : "") + std::to_string(widths[i]);
  return out;
}

struct Field
{
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Field>& fields()
{
  static const std::vector<Field> table = {
      {"distance", [](RunConfig& c, const std::string& v) { c.distance = parse_distance_kind(v); },
       [](const RunConfig& c) { return std::string(to_string(c.distance)); }},
      {"cost",
       [](RunConfig& c, const std::string& v) {
         if (v == "log") {
           if (!std::holds_alternative<LogComposite>(c.cost)) c.cost = LogComposite{};
         } else if (v == "lambda") {
           if (!std::holds_alternative<LambdaWeighted>(c.cost)) c.cost = LambdaWeighted{};
         } else {
           bad_value("cost", v);
         }
       },
       [](const RunConfig& c) { return std::string(std::holds_alternative<LogComposite>(c.cost) ? "log" : "lambda"); }},
      // lambda and log_floor only apply to their own cost mode; setting one
      // selects that mode.
      {"lambda", [](RunConfig& c, const std::string& v) { c.cost = LambdaWeighted{parse_double("lambda", v)}; },
       [](const RunConfig& c) {
         const auto* w = std::get_if<LambdaWeighted>(&c.cost);
         return w ? format_double(w->lambda) : std::string();
       }},
      {"log_floor", [](RunConfig& c, const std::string& v) { c.cost = LogComposite{parse_double("log_floor", v)}; },
       [](const RunConfig& c) {
         const auto* l = std::get_if<LogComposite>(&c.cost);
         return l ? format_double(l->floor) : std::string();
       }},
      {"projections", [](RunConfig& c, const std::string& v) { c.projections = parse_int<Eigen::Index>("projections", v); },
       [](const RunConfig& c) { return std::to_string(c.projections); }},
      {"directions",
       [](RunConfig& c, const std::string& v) {
         if (v == "per_batch") c.directions = DirectionSchedule::PerBatch;
         else if (v == "fixed") c.directions = DirectionSchedule::Fixed;
         else bad_value("directions", v);
       },
       [](const RunConfig& c) {
         return std::string(c.directions == DirectionSchedule::PerBatch ? "per_batch" : "fixed");
       }},
      {"ks_variant",
       [](RunConfig& c, const std::string& v) {
         if (v == "one_sided") c.ks_variant = KsVariant::OneSided;
         else if (v == "two_sided") c.ks_variant = KsVariant::TwoSided;
         else bad_value("ks_variant", v);
       },
       [](const RunConfig& c) { return std::string(c.ks_variant == KsVariant::OneSided ? "one_sided" : "two_sided"); }},
      {"share_sw_sample", [](RunConfig& c, const std::string& v) { c.share_sw_sample = parse_bool("share_sw_sample", v); },
       [](const RunConfig& c) { return std::string(c.share_sw_sample ? "true" : "false"); }},
      {"latent_dim", [](RunConfig& c, const std::string& v) { c.latent_dim = parse_int<Eigen::Index>("latent_dim", v); },
       [](const RunConfig& c) { return std::to_string(c.latent_dim); }},
      {"encoder_hidden", [](RunConfig& c, const std::string& v) { c.encoder_hidden = parse_widths("encoder_hidden", v); },
       [](const RunConfig& c) { return format_widths(c.encoder_hidden); }},
      {"decoder_hidden", [](RunConfig& c, const std::string& v) { c.decoder_hidden = parse_widths("decoder_hidden", v); },
       [](const RunConfig& c) { return format_widths(c.decoder_hidden); }},
      {"optimizer",
       [](RunConfig& c, const std::string& v) {
         if (v == "adam") c.optimizer.kind = net::OptimizerKind::Adam;
         else if (v == "sgd") c.optimizer.kind = net::OptimizerKind::Sgd;
         else bad_value("optimizer", v);
       },
       [](const RunConfig& c) { return std::string(c.optimizer.kind == net::OptimizerKind::Adam ? "adam" : "sgd"); }},
      {"learning_rate", [](RunConfig& c, const std::string& v) { c.optimizer.learning_rate = parse_double("learning_rate", v); },
       [](const RunConfig& c) { return format_double(c.optimizer.learning_rate); }},
      {"beta1", [](RunConfig& c, const std::string& v) { c.optimizer.beta1 = parse_double("beta1", v); },
       [](const RunConfig& c) { return format_double(c.optimizer.beta1); }},
      {"beta2", [](RunConfig& c, const std::string& v) { c.optimizer.beta2 = parse_double("beta2", v); },
       [](const RunConfig& c) { return format_double(c.optimizer.beta2); }},
      {"epsilon", [](RunConfig& c, const std::string& v) { c.optimizer.epsilon = parse_double("epsilon", v); },
       [](const RunConfig& c) { return format_double(c.optimizer.epsilon); }},
      {"batch_size", [](RunConfig& c, const std::string& v) { c.batch_size = parse_int<Eigen::Index>("batch_size", v); },
       [](const RunConfig& c) { return std::to_string(c.batch_size); }},
      {"epochs", [](RunConfig& c, const std::string& v) { c.epochs = parse_int<std::int64_t>("epochs", v); },
       [](const RunConfig& c) { return std::to_string(c.epochs); }},
      {"checkpoint_every",
       [](RunConfig& c, const std::string& v) { c.checkpoint_every = parse_int<std::int64_t>("checkpoint_every", v); },
       [](const RunConfig& c) { return std::to_string(c.checkpoint_every); }},
      {"monitor_projections",
       [](RunConfig& c, const std::string& v) { c.monitor_projections = parse_int<Eigen::Index>("monitor_projections", v); },
       [](const RunConfig& c) { return std::to_string(c.monitor_projections); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_int<std::uint64_t>("seed", v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"data_source",
       [](RunConfig& c, const std::string& v) {
         if (v != "gaussian_mixture" && v != "ring" && v != "checker" && v != "csv" && v != "idx")
           bad_value("data_source", v);
         c.data_source = v;
       },
       [](const RunConfig& c) { return c.data_source; }},
      {"data_points", [](RunConfig& c, const std::string& v) { c.data_points = parse_int<Eigen::Index>("data_points", v); },
       [](const RunConfig& c) { return std::to_string(c.data_points); }},
      {"mixture_components",
       [](RunConfig& c, const std::string& v) { c.mixture_components = parse_int<Eigen::Index>("mixture_components", v); },
       [](const RunConfig& c) { return std::to_string(c.mixture_components); }},
      {"test_fraction", [](RunConfig& c, const std::string& v) { c.test_fraction = parse_double("test_fraction", v); },
       [](const RunConfig& c) { return format_double(c.test_fraction); }},
      {"train_path", [](RunConfig& c, const std::string& v) { c.train_path = v; },
       [](const RunConfig& c) { return c.train_path; }},
      {"train_labels", [](RunConfig& c, const std::string& v) { c.train_labels = v; },
       [](const RunConfig& c) { return c.train_labels; }},
      {"test_path", [](RunConfig& c, const std::string& v) { c.test_path = v; },
       [](const RunConfig& c) { return c.test_path; }},
      {"output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
       [](const RunConfig& c) { return c.output_dir.string(); }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const
{
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("config: ") + what);
  };
  if (const auto* w = std::get_if<LambdaWeighted>(&cost)) require(w->lambda > 0, "lambda must be positive");
  if (const auto* l = std::get_if<LogComposite>(&cost)) require(l->floor > 0, "log_floor must be positive");
  require(projections >= 1, "projections must be positive");
  require(latent_dim >= 1, "latent_dim must be positive");
  for (auto w : encoder_hidden) require(w >= 1, "encoder_hidden widths must be positive");
  for (auto w : decoder_hidden) require(w >= 1, "decoder_hidden widths must be positive");
  require(optimizer.learning_rate > 0, "learning_rate must be positive");
  require(optimizer.beta1 > 0 && optimizer.beta1 < 1, "beta1 must lie in (0, 1)");
  require(optimizer.beta2 > 0 && optimizer.beta2 < 1, "beta2 must lie in (0, 1)");
  require(optimizer.epsilon > 0, "epsilon must be positive");
  require(batch_size >= 1, "batch_size must be positive");
  require(epochs >= 0, "epochs must be nonnegative");
  require(checkpoint_every >= 1, "checkpoint_every must be positive");
  require(monitor_projections >= 1, "monitor_projections must be positive");
  require(data_points >= 10, "data_points must be at least 10");
  require(mixture_components >= 1, "mixture_components must be positive");
  require(test_fraction > 0 && test_fraction < 1, "test_fraction must lie in (0, 1)");
  if (data_source == "csv" || data_source == "idx") require(!train_path.empty(), "train_path is required");
}

const std::vector<std::string>& config_keys()
{
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value)
{
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(config, value);
      return;
    }
  }
  throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig parse_config(const std::string& text, RunConfig base)
{
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(line_no) + " is not key = value");
    apply_setting(base, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base)
{
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

std::string to_text(const RunConfig& config)
{
  std::string out;
  for (const auto& f : fields()) {
    const std::string value = f.get(config);
    if (value.empty() && (f.key == "lambda" || f.key == "log_floor")) continue;
    out += f.key + " = " + value + "\n";
  }
  return out;
}

}  // namespace sliced::harness
