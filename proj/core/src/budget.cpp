#include "textcoder/budget.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "textcoder/error.hpp"

namespace textcoder {

double request_cost(std::size_t prompt_tokens, std::size_t completion_tokens,
                    const CostModel& model) {
  if (model.input_rate < 0 || model.output_rate < 0) {
    throw PreconditionError("negative rate in cost model");
  }
  return static_cast<double>(prompt_tokens) / 1000.0 * model.input_rate +
         static_cast<double>(completion_tokens) / 1000.0 * model.output_rate;
}

CorpusCost corpus_cost(std::span<const double> per_instance) {
  if (per_instance.empty()) throw PreconditionError("corpus_cost over no instances");
  // Neumaier's variant of Kahan summation.
  double sum = 0.0;
  double c = 0.0;
  for (const double x : per_instance) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  CorpusCost out;
  out.total = sum + c;
  out.n = per_instance.size();
  out.mean = out.total / static_cast<double>(out.n);
  return out;
}

HumanCost human_cost(std::size_t n_instances, const HumanBaseline& baseline,
                     std::optional<double> hours_override) {
  if (baseline.sentences_per_hour <= 0 || baseline.wage_per_hour <= 0 || baseline.n_coders == 0) {
    throw PreconditionError("human baseline needs positive rate, wage and coder count");
  }
  if (n_instances == 0 && !hours_override) {
    throw PreconditionError("human baseline needs at least one instance");
  }
  if (hours_override && *hours_override <= 0) {
    throw PreconditionError("hours override must be positive");
  }
  HumanCost out;
  out.hours = hours_override ? *hours_override
                             : static_cast<double>(n_instances) / baseline.sentences_per_hour;
  out.total = out.hours * baseline.wage_per_hour * static_cast<double>(baseline.n_coders);
  return out;
}

double speedup(double human_minutes, double machine_minutes) {
  if (machine_minutes <= 0) throw PreconditionError("machine time must be positive");
  return human_minutes / machine_minutes;
}

std::int64_t to_minor_units(double amount, int decimals) {
  return std::llround(amount * std::pow(10.0, decimals));
}

std::string format_money(double amount, std::string_view currency, int decimals) {
  const auto minor = to_minor_units(amount, decimals);
  const auto scale = static_cast<std::int64_t>(std::llround(std::pow(10.0, decimals)));
  const auto mag = minor < 0 ? -minor : minor;
  std::string s = fmt::format("{}{}", minor < 0 ? "-" : "", mag / scale);
  if (decimals > 0) s += fmt::format(".{:0{}}", mag % scale, decimals);
  if (!currency.empty()) s += fmt::format(" {}", currency);
  return s;
}

PricingTable parse_pricing(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("pricing file: ") + e.what());
  }
  if (root["models"]) root = root["models"];
  if (!root.IsMap()) throw ConfigError("pricing file must map model names to rates");
  PricingTable table;
  for (const auto& kv : root) {
    const auto name = kv.first.as<std::string>();
    const auto& node = kv.second;
    if (!node.IsMap() || !node["input_rate"] || !node["output_rate"]) {
      throw ConfigError("pricing for '" + name + "' needs input_rate and output_rate");
    }
    CostModel m;
    try {
      m.input_rate = node["input_rate"].as<double>();
      m.output_rate = node["output_rate"].as<double>();
      if (node["currency"]) m.currency = node["currency"].as<std::string>();
    } catch (const YAML::Exception& e) {
      throw ConfigError("pricing for '" + name + "': " + e.what());
    }
    if (m.input_rate < 0 || m.output_rate < 0) {
      throw ConfigError("pricing for '" + name + "' has a negative rate");
    }
    table.emplace(name, m);
  }
  return table;
}

PricingTable load_pricing(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read pricing file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_pricing(ss.str());
}

const CostModel& pricing_for(const PricingTable& table, const std::string& model) {
  const auto it = table.find(model);
  if (it != table.end()) return it->second;
  std::string known;
  for (const auto& [name, m] : table) known += (known.empty() ? "" : ", ") + name;
  throw ConfigError("no pricing for model '" + model + "' (known: " +
                    (known.empty() ? "none" : known) + ")");
}

}  // namespace textcoder
