#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace textcoder {

struct CostModel {
  double input_rate = 0.0;   // currency per 1000 prompt tokens
  double output_rate = 0.0;  // currency per 1000 completion tokens
  std::string currency = "USD";
};

struct HumanBaseline {
  double sentences_per_hour = 100.0;
  double wage_per_hour = 0.0;
  std::size_t n_coders = 1;
  std::string currency = "USD";
};

double request_cost(std::size_t prompt_tokens, std::size_t completion_tokens,
                    const CostModel& model);

struct CorpusCost {
  double total = 0.0;
  double mean = 0.0;
  std::size_t n = 0;
};

// Compensated summation so long runs of tiny per-request costs stay exact
// to well below a cent.
CorpusCost corpus_cost(std::span<const double> per_instance);

struct HumanCost {
  double hours = 0.0;
  double total = 0.0;
};

HumanCost human_cost(std::size_t n_instances, const HumanBaseline& baseline,
                     std::optional<double> hours_override = std::nullopt);

double speedup(double human_minutes, double machine_minutes);

// Rounds half away from zero to integer minor units (cents, öre).
std::int64_t to_minor_units(double amount, int decimals = 2);
// "234.65 USD"; `decimals` digits after the point.
std::string format_money(double amount, std::string_view currency, int decimals = 2);

// Model name -> rates. YAML (or JSON) mapping:
//   text-davinci-003: {input_rate: 0.02, output_rate: 0.02, currency: USD}
using PricingTable = std::map<std::string, CostModel>;

PricingTable load_pricing(const std::filesystem::path& path);
PricingTable parse_pricing(std::string_view text);
// Throws ConfigError naming the model and the models that do have prices.
const CostModel& pricing_for(const PricingTable& table, const std::string& model);

}  // namespace textcoder
