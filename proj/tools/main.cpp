// Copyright 2026 The t2imt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line surface. Results go to stdout (machine readable where it
// matters), diagnostics to stderr. Exit codes: 0 success, 1 runtime
// failure, 2 usage/config error, 3 partial completion.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "t2imt/campaign.hpp"
#include "t2imt/error.hpp"
#include "t2imt/matrix.hpp"
#include "t2imt/metrics.hpp"
#include "t2imt/mr.hpp"
#include "t2imt/mutation.hpp"
#include "t2imt/report.hpp"
#include "t2imt/rng.hpp"
#include "t2imt/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

int cmd_run(const std::string& config_path) {
  t2imt::CampaignConfig config = t2imt::CampaignConfig::load(config_path);
  t2imt::CampaignResult result = t2imt::run_campaign(config);
  nlohmann::json summary;
  summary["cells_total"] = result.cells_total;
  summary["completed"] = result.completed;
  summary["inapplicable"] = result.inapplicable;
  summary["failed"] = result.failed;
  summary["interrupted"] = result.interrupted;
  summary["generator_calls"] = result.generator_calls;
  summary["output_dir"] = config.output_dir.string();
  std::cout << summary.dump() << "\n";
  if (result.interrupted || result.failed > 0 || !result.report.missing_cells.empty())
    return kExitPartial;
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  std::vector<std::string> problems = t2imt::validate_config_file(config_path);
  if (problems.empty()) {
    std::cout << "ok\n";
    return kExitOk;
  }
  for (const auto& p : problems) std::cerr << "error: " << p << "\n";
  return kExitConfig;
}

struct MutateArgs {
  std::string seeds, registry, op, candidates, synonyms, templates;
  uint64_t rng_seed = 0;
};

int cmd_mutate(const MutateArgs& args) {
  auto op = t2imt::op_from_token(args.op);
  if (!op) {
    std::cerr << "error: unknown operator '" << args.op << "'\n";
    return kExitConfig;
  }
  auto registry = t2imt::Registry::load(args.registry);
  auto seeds = t2imt::load_seed_corpus(args.seeds);
  t2imt::TemplateSet templates =
      args.templates.empty() ? t2imt::TemplateSet{} : t2imt::TemplateSet::load(args.templates);
  t2imt::CandidatePool candidates =
      args.candidates.empty() ? t2imt::CandidatePool::from_corpus(seeds, registry)
                              : t2imt::CandidatePool::load(args.candidates, registry);
  t2imt::SynonymLexicon synonyms;
  if (!args.synonyms.empty()) synonyms = t2imt::SynonymLexicon::load(args.synonyms);

  for (const auto& seed : seeds) {
    nlohmann::json line;
    line["id"] = seed.id;
    line["op"] = args.op;
    try {
      t2imt::ERPool pool =
          t2imt::build_pool(seed.caption, seed.triples, registry, /*strict=*/true).pool;
      uint64_t op_seed = t2imt::derive_seed(
          args.rng_seed, {t2imt::fnv1a64(seed.id), t2imt::fnv1a64(t2imt::op_token(*op))});
      uint64_t ec_seed = t2imt::derive_seed(
          args.rng_seed,
          {t2imt::fnv1a64(seed.id), t2imt::fnv1a64(t2imt::op_token(t2imt::Op::kEntityChange))});
      std::string prompt;
      switch (*op) {
        case t2imt::Op::kSynonymSub:
          prompt = t2imt::mutate_ss(seed.caption, synonyms, op_seed).caption;
          break;
        case t2imt::Op::kEntityChange:
          prompt = t2imt::render(t2imt::mutate_ec(pool, candidates, ec_seed).follow_pool,
                                 templates, registry);
          break;
        case t2imt::Op::kTripleRemoval:
          prompt = t2imt::render(t2imt::mutate_er_r(pool, op_seed).follow_pool, templates,
                                 registry);
          break;
        case t2imt::Op::kTripleAugment:
          prompt = t2imt::render(t2imt::mutate_er_a(pool, candidates, op_seed).follow_pool,
                                 templates, registry);
          break;
        case t2imt::Op::kChangeThenRemoval:
        case t2imt::Op::kChangeThenAugment: {
          auto first = t2imt::mutate_ec(pool, candidates, ec_seed);
          auto second = *op == t2imt::Op::kChangeThenRemoval
                            ? t2imt::mutate_er_r(first.follow_pool, op_seed)
                            : t2imt::mutate_er_a(first.follow_pool, candidates, op_seed);
          prompt = t2imt::render(second.follow_pool, templates, registry);
          break;
        }
      }
      line["status"] = "ok";
      line["prompt"] = prompt;
    } catch (const t2imt::Error& e) {
      switch (e.code()) {
        case t2imt::ErrorCode::kInsufficientDensity:
        case t2imt::ErrorCode::kNoEligibleReplacement:
        case t2imt::ErrorCode::kNoEligibleAugmentation:
        case t2imt::ErrorCode::kNoSubstitutableWord:
        case t2imt::ErrorCode::kEmptyPool:
          line["status"] = "inapplicable";
          line["reason"] = e.what();
          break;
        default:
          throw;
      }
    }
    std::cout << line.dump() << "\n";
  }
  return kExitOk;
}

int cmd_report(const std::string& run_dir, const std::string& format) {
  t2imt::MetricReport report = t2imt::report_from_run_dir(run_dir);
  if (format == "json") {
    std::cout << report.to_json().dump(2) << "\n";
  } else if (format == "csv") {
    std::cout << t2imt::render_csv(report);
  } else {
    std::cout << t2imt::render_markdown(report);
  }
  if (!report.missing_cells.empty()) {
    std::cerr << "warning: " << report.missing_cells.size() << " missing cell(s)\n";
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_eval(const std::string& run_dir) {
  t2imt::MetricReport report = t2imt::reevaluate_run(run_dir);
  std::cout << report.to_json().dump(2) << "\n";
  return report.missing_cells.empty() ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metamorphic testing harness for text-to-image services"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "execute a campaign");
  run->add_option("--config", config_path, "campaign config file")->required();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a campaign config");
  validate->add_option("--config", validate_path, "campaign config file")->required();

  MutateArgs mutate_args;
  auto* mutate = app.add_subcommand("mutate", "print follow-up prompts for a seed corpus");
  mutate->add_option("--seeds", mutate_args.seeds, "seed corpus (jsonl)")->required();
  mutate->add_option("--registry", mutate_args.registry, "registry file")->required();
  mutate->add_option("--op", mutate_args.op, "operator: ss|ec|er_r|er_a|ec+er_r|ec+er_a")
      ->required();
  mutate->add_option("--rng-seed", mutate_args.rng_seed, "campaign rng seed");
  mutate->add_option("--candidates", mutate_args.candidates, "candidate pool file");
  mutate->add_option("--synonyms", mutate_args.synonyms, "synonym lexicon file");
  mutate->add_option("--templates", mutate_args.templates, "template file");

  std::string report_dir, report_format = "md";
  auto* report = app.add_subcommand("report", "render the report for a run directory");
  report->add_option("--run", report_dir, "run directory")->required();
  report->add_option("--format", report_format, "md|csv|json")
      ->check(CLI::IsMember({"md", "csv", "json"}));

  std::string eval_dir;
  auto* eval = app.add_subcommand("eval", "re-evaluate verdicts from persisted artifacts");
  eval->add_option("--run", eval_dir, "run directory")->required();

  auto* metrics = app.add_subcommand("metrics", "numeric metrics over ingested files");
  metrics->require_subcommand(1);

  std::string fid_real, fid_gen;
  auto* fid = metrics->add_subcommand("fid", "distance between feature sets");
  fid->add_option("--real", fid_real, "real features matrix file")->required();
  fid->add_option("--gen", fid_gen, "generated features matrix file")->required();

  std::string is_probs, is_logits;
  double is_temperature = 1.0;
  int is_splits = 10;
  auto* is_cmd = metrics->add_subcommand("is", "inception-style score");
  is_cmd->add_option("--probs", is_probs, "probability matrix file");
  is_cmd->add_option("--logits", is_logits, "logit matrix file (temperature-scaled first)");
  is_cmd->add_option("--temperature", is_temperature, "softmax temperature for --logits");
  is_cmd->add_option("--splits", is_splits, "number of splits");

  std::string rp_sims;
  auto* rp = metrics->add_subcommand("rp", "retrieval precision over similarity rows");
  rp->add_option("--sims", rp_sims, "similarity matrix file (column 0 = true caption)")
      ->required();

  std::string ft_logits, ft_labels;
  auto* ft = metrics->add_subcommand("fit-temp", "grid-search temperature on labeled logits");
  ft->add_option("--logits", ft_logits, "logit matrix file")->required();
  ft->add_option("--labels", ft_labels, "label file (one class index per line)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*validate) return cmd_validate(validate_path);
    if (*mutate) return cmd_mutate(mutate_args);
    if (*report) return cmd_report(report_dir, report_format);
    if (*eval) return cmd_eval(eval_dir);
    if (*fid) {
      auto real = t2imt::summarize(
          t2imt::FeatureSet::load(fid_real, t2imt::FeatureSource::kReal));
      auto gen = t2imt::summarize(
          t2imt::FeatureSet::load(fid_gen, t2imt::FeatureSource::kGenerated));
      std::printf("%.6f\n", t2imt::frechet_distance(real, gen));
      return kExitOk;
    }
    if (*is_cmd) {
      if (is_probs.empty() == is_logits.empty()) {
        std::cerr << "error: pass exactly one of --probs / --logits\n";
        return kExitConfig;
      }
      t2imt::Mat probs;
      if (!is_probs.empty()) {
        probs = t2imt::load_matrix(is_probs);
      } else {
        probs = t2imt::temperature_scale(t2imt::LogitSet::load(is_logits), is_temperature);
      }
      int splits = std::min<int>(is_splits, static_cast<int>(probs.rows));
      auto score = t2imt::inception_score(probs, std::max(splits, 1));
      std::printf("%.6f %.6f\n", score.mean, score.stddev);
      return kExitOk;
    }
    if (*rp) {
      std::printf("%.6f\n", t2imt::r_precision(t2imt::load_matrix(rp_sims)));
      return kExitOk;
    }
    if (*ft) {
      auto logits = t2imt::LogitSet::load(ft_logits);
      auto labels = t2imt::load_labels(ft_labels);
      auto fit = t2imt::fit_temperature(logits, labels);
      std::printf("%.2f %.6f\n", fit.temperature, fit.nll);
      return kExitOk;
    }
  } catch (const t2imt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == t2imt::ErrorCode::kConfigError ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
