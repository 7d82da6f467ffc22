#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "biaslens/report.hpp"
#include "biaslens/synth.hpp"
#include "biaslens/version.hpp"

namespace {

std::vector<std::string> split_csv_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int run_analyze(const std::string& events, const std::string& articles,
                const std::string& category_list, std::uint64_t min_clicks,
                std::size_t top_keywords, double r2_threshold, double sigma_mult,
                const std::string& zero_policy, const std::string& std_mode,
                const std::string& stopwords, bool dedup_users,
                const std::string& output, const std::string& format) {
  biaslens::AnalyzeOptions opts;
  opts.events_path = events;
  opts.articles_path = articles;
  opts.categories = split_csv_list(category_list);
  opts.min_clicks = min_clicks;
  opts.top_keywords = top_keywords;
  opts.detector.r2_threshold = r2_threshold;
  opts.detector.sigma_multiplier = sigma_mult;
  opts.output_dir = output;
  if (!stopwords.empty()) opts.stopwords_path = stopwords;
  opts.dedup_users = dedup_users;

  if (zero_policy == "drop") {
    opts.zero_policy = biaslens::ZeroPolicy::Drop;
  } else if (zero_policy == "add_one") {
    opts.zero_policy = biaslens::ZeroPolicy::AddOne;
  } else {
    std::cerr << "unknown --zero-policy '" << zero_policy << "'\n";
    return 1;
  }
  if (std_mode == "population") {
    opts.detector.std_mode = biaslens::StdMode::Population;
  } else if (std_mode == "sample") {
    opts.detector.std_mode = biaslens::StdMode::Sample;
  } else {
    std::cerr << "unknown --std-mode '" << std_mode << "'\n";
    return 1;
  }
  opts.emit_csv = false;
  opts.emit_json = false;
  for (const std::string& f : split_csv_list(format)) {
    if (f == "csv") opts.emit_csv = true;
    else if (f == "json") opts.emit_json = true;
    else {
      std::cerr << "unknown --format entry '" << f << "'\n";
      return 1;
    }
  }
  if (!opts.emit_csv && !opts.emit_json) {
    std::cerr << "--format selects neither csv nor json\n";
    return 1;
  }
  return biaslens::run_pipeline(opts);
}

int run_synth(const std::string& config_path, const std::string& output) {
  try {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot open config file: " << config_path << "\n";
      return 1;
    }
    nlohmann::json config_json = nlohmann::json::parse(in);
    const auto config = biaslens::SynthConfig::from_json(config_json);
    const auto dataset = biaslens::generate_dataset(config);
    biaslens::write_synth_dataset(dataset, output);
    biaslens::log_message(biaslens::LogLevel::Info,
                          "synth: wrote " + std::to_string(dataset.events.size()) +
                              " events, " + std::to_string(dataset.articles.size()) +
                              " articles to " + output);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "synth failed: " << e.what() << "\n";
    return 1;
  }
}

int run_evaluate(const std::string& detected_path, const std::string& truth_path) {
  try {
    std::ifstream det_in(detected_path);
    if (!det_in) {
      std::cerr << "cannot open detected file: " << detected_path << "\n";
      return 1;
    }
    std::ifstream truth_in(truth_path);
    if (!truth_in) {
      std::cerr << "cannot open truth file: " << truth_path << "\n";
      return 1;
    }
    const auto detected =
        biaslens::classified_from_json(nlohmann::json::parse(det_in));
    const auto truth = biaslens::GroundTruth::from_json(nlohmann::json::parse(truth_in));
    const auto report = biaslens::evaluate_detection(detected, truth);
    std::cout << report.to_json().dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "evaluate failed: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Demographic bias analysis of news interaction logs"};
  app.set_version_flag("--version", std::string(biaslens::kVersion));
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Run the full analysis pipeline");
  std::string events, articles, category, output;
  std::string zero_policy = "drop", std_mode = "population", stopwords,
              format = "csv,json";
  std::uint64_t min_clicks = 100;
  std::size_t top_keywords = 100;
  double r2_threshold = 0.5, sigma_mult = 2.0;
  bool dedup_users = false;
  analyze->add_option("--events", events, "Events file (.jsonl or .csv)")->required();
  analyze->add_option("--articles", articles, "Article catalog (.jsonl or .csv)")
      ->required();
  analyze->add_option("--category", category,
                      "Category to analyze (comma-separated for several)")
      ->required();
  analyze->add_option("--min-clicks", min_clicks,
                      "Keep articles with strictly more clicks than this");
  analyze->add_option("--top-keywords", top_keywords,
                      "Number of keywords by document frequency");
  analyze->add_option("--r2-threshold", r2_threshold,
                      "Exclude fits with r^2 <= threshold");
  analyze->add_option("--sigma-mult", sigma_mult, "Band half-width in sigmas");
  analyze->add_option("--zero-policy", zero_policy,
                      "Zero-count handling: drop | add_one");
  analyze->add_option("--std-mode", std_mode,
                      "Standard deviation mode: population | sample");
  analyze->add_option("--stopwords", stopwords, "Stopword file (one token per line)");
  analyze->add_option("--dedup-users", dedup_users,
                      "Count each (user, article, action) once");
  analyze->add_option("--output", output, "Output directory")->required();
  analyze->add_option("--format", format, "Outputs to emit: csv,json");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  std::string synth_config, synth_output;
  synth->add_option("--config", synth_config, "Synth config JSON")->required();
  synth->add_option("--output", synth_output, "Output directory")->required();

  // evaluate
  auto* evaluate =
      app.add_subcommand("evaluate", "Score detections against ground truth");
  std::string detected, truth;
  evaluate->add_option("--detected", detected, "classified_keywords.json")->required();
  evaluate->add_option("--truth", truth, "ground_truth.json")->required();

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed())
    return run_analyze(events, articles, category, min_clicks, top_keywords,
                       r2_threshold, sigma_mult, zero_policy, std_mode, stopwords,
                       dedup_users, output, format);
  if (synth->parsed()) return run_synth(synth_config, synth_output);
  if (evaluate->parsed()) return run_evaluate(detected, truth);
  return 1;
}
