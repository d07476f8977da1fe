// pmvis: command-line entry point for the pseudo-label curation toolkit.
// Subcommands: stats, gen, curate, eval, sweep, selfcheck.
// Exit codes: 0 success, 1 check or metric failure, 2 input error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmvis/config.hpp"
#include "pmvis/curation.hpp"
#include "pmvis/dataset.hpp"
#include "pmvis/errors.hpp"
#include "pmvis/eval.hpp"
#include "pmvis/losses.hpp"
#include "pmvis/mask.hpp"
#include "pmvis/rng.hpp"
#include "pmvis/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pmvis::SchemaError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  if (fs::path(path).has_parent_path())
    fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pmvis::SchemaError("cannot write file '" + path + "'");
  out << content;
}

void print_stats(const pmvis::CategoryStats& stats,
                 const std::map<int, std::string>& categories, const char* item_label) {
  std::printf("%-20s %4s %8s %8s\n", "class", "id", item_label, "annos");
  for (const auto& [cat, entry] : stats.per_category) {
    auto it = categories.find(cat);
    std::string name = it == categories.end() ? "?" : it->second;
    std::printf("%-20s %4d %8d %8d\n", name.c_str(), cat, entry.first, entry.second);
  }
  std::printf("%-20s %4s %8d %8d\n", "TOTAL", "-", stats.items, stats.annotations);
  std::printf("classes with annotations: %d\n", stats.classes);
}

int cmd_stats(const std::string& path, const std::string& kind) {
  std::string text = read_file(path);
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw pmvis::SchemaError("invalid JSON in '" + path + "'");
  if (doc.contains("videos")) {
    pmvis::VideoDataset ds = pmvis::parse_video_dataset(text);
    print_stats(pmvis::dataset_stats(ds), ds.categories, "videos");
  } else {
    auto k = kind == "box-only" ? pmvis::ImageDatasetKind::kBoxOnly
                                : pmvis::ImageDatasetKind::kPixel;
    pmvis::ImageDataset ds = pmvis::parse_image_dataset(text, k);
    print_stats(pmvis::dataset_stats(ds), ds.categories, "images");
    for (const auto& w : ds.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  }
  return 0;
}

int cmd_gen(const pmvis::PipelineConfig& cfg, const std::string& out_dir) {
  pmvis::Corpus corpus = pmvis::make_corpus(cfg.corpus, cfg.corruption);
  write_file(out_dir + "/gt.json", pmvis::serialize_video_dataset(corpus.ground_truth));
  write_file(out_dir + "/raw.json",
             pmvis::serialize_raw_detections(corpus.ground_truth.videos,
                                             corpus.ground_truth.categories,
                                             corpus.raw_sets));
  ordered_json ledger = ordered_json::array();
  for (size_t v = 0; v < corpus.ledgers.size(); ++v) {
    for (const auto& e : corpus.ledgers[v].entries) {
      ledger.push_back(ordered_json{
          {"video_id", corpus.raw_sets[v].video_id},
          {"frame", e.frame},
          {"det_index", e.det_index},
          {"origin", e.origin == pmvis::DetectionOrigin::kTrue ? "true" : "spurious"},
          {"source_track_id", e.source_track_id}});
    }
  }
  write_file(out_dir + "/ledger.json", ledger.dump(1));
  std::printf("wrote %s/{gt,raw,ledger}.json (%d videos, %zu tracks)\n",
              out_dir.c_str(), cfg.corpus.num_videos,
              corpus.ground_truth.tracks.size());
  return 0;
}

int cmd_curate(const pmvis::PipelineConfig& cfg) {
  std::vector<pmvis::VideoInfo> videos;
  std::map<int, std::string> categories;
  auto raw_sets = pmvis::parse_raw_detections(read_file(cfg.raw_path), &videos,
                                              &categories);
  pmvis::CurationSummary summary;
  pmvis::VideoDataset curated = pmvis::curate(videos, categories, raw_sets,
                                              cfg.tracker, cfg.filter, &summary,
                                              cfg.jobs);
  write_file(cfg.out_path, pmvis::serialize_video_dataset(curated));
  ordered_json js{{"linked", summary.linked},
                  {"propagated", summary.propagated},
                  {"after_pscore", summary.after_pscore},
                  {"after_topk", summary.after_topk}};
  write_file(cfg.out_path + ".summary.json", js.dump(1));
  std::printf("linked %d, propagated %d, after PScore %d, after TopK %d\n",
              summary.linked, summary.propagated, summary.after_pscore,
              summary.after_topk);
  return 0;
}

int cmd_eval(const std::string& preds_path, const std::string& gt_path,
             const pmvis::PipelineConfig& cfg, const std::string& out_path) {
  pmvis::VideoDataset preds = pmvis::parse_video_dataset(read_file(preds_path));
  pmvis::VideoDataset gts = pmvis::parse_video_dataset(read_file(gt_path));
  pmvis::EvalReport report = pmvis::evaluate(preds, gts, cfg.eval);
  std::fputs(pmvis::report_to_text(report, gts.categories).c_str(), stdout);
  if (!out_path.empty())
    write_file(out_path, pmvis::report_to_json(report, gts.categories));
  return 0;
}

int cmd_sweep(const pmvis::PipelineConfig& cfg, const std::string& param,
              const std::vector<double>& values, const std::string& out_path) {
  if (values.empty()) throw pmvis::SchemaError("sweep needs a nonempty value list");
  if (param != "K" && param != "tau")
    throw pmvis::SchemaError("sweep parameter must be K or tau");

  std::vector<pmvis::VideoInfo> videos;
  std::map<int, std::string> categories;
  auto raw_sets = pmvis::parse_raw_detections(read_file(cfg.raw_path), &videos,
                                              &categories);
  pmvis::VideoDataset gts = pmvis::parse_video_dataset(read_file(cfg.ground_truth_path));

  auto pct = [](double f) { return std::round(f * 1000.0) / 10.0; };
  ordered_json rows = ordered_json::array();
  std::printf("%-10s %6s %6s %6s %6s %6s\n", param.c_str(), "AP", "AP50", "AP75",
              "AR1", "AR10");
  for (double value : values) {
    pmvis::FilterConfig filter = cfg.filter;
    if (param == "K")
      filter.top_k = int(std::lround(value));
    else
      filter.score_threshold = value;
    pmvis::VideoDataset curated = pmvis::curate(videos, categories, raw_sets,
                                                cfg.tracker, filter, nullptr,
                                                cfg.jobs);
    pmvis::EvalReport r = pmvis::evaluate(curated, gts, cfg.eval);
    std::printf("%-10g %6.1f %6.1f %6.1f %6.1f %6.1f\n", value, pct(r.ap),
                pct(r.ap50), pct(r.ap75), pct(r.ar.size() > 0 ? r.ar[0] : 0.0),
                pct(r.ar.size() > 1 ? r.ar[1] : 0.0));
    rows.push_back(ordered_json{{"value", value},
                                {"AP", pct(r.ap)},
                                {"AP50", pct(r.ap50)},
                                {"AP75", pct(r.ap75)},
                                {"AR1", pct(r.ar.size() > 0 ? r.ar[0] : 0.0)},
                                {"AR10", pct(r.ar.size() > 1 ? r.ar[1] : 0.0)}});
  }
  if (!out_path.empty())
    write_file(out_path, ordered_json{{"param", param}, {"rows", rows}}.dump(1));
  return 0;
}

// ---- selfcheck -----------------------------------------------------------

bool fd_check(const char* name,
              const std::function<pmvis::LossResult(const pmvis::ProbGrid&)>& f,
              pmvis::ProbGrid grid, double tol,
              const std::function<bool(const pmvis::ProbGrid&, int)>& skip) {
  const double h = 1e-4;
  pmvis::LossResult base = f(grid);
  for (size_t i = 0; i < grid.values.size(); ++i) {
    if (skip && skip(grid, int(i))) continue;
    double saved = grid.values[i];
    grid.values[i] = saved + h;
    double up = f(grid).value;
    grid.values[i] = saved - h;
    double down = f(grid).value;
    grid.values[i] = saved;
    double fd = (up - down) / (2.0 * h);
    double err = std::abs(base.grad[i] - fd) /
                 std::max({1.0, std::abs(fd), std::abs(base.grad[i])});
    if (err > tol) {
      std::fprintf(stderr, "%s: gradient mismatch at %zu (analytic %g, fd %g)\n",
                   name, i, base.grad[i], fd);
      return false;
    }
  }
  return true;
}

int cmd_selfcheck(const pmvis::PipelineConfig& cfg, const std::string& golden_path,
                  double tol, int rounds) {
  bool ok = true;
  auto check = [&](const char* name, bool pass) {
    std::printf("%-28s %s\n", name, pass ? "PASS" : "FAIL");
    ok = ok && pass;
  };

  // RLE golden corpus.
  bool rle_ok = true;
  try {
    json golden = json::parse(read_file(golden_path));
    for (const auto& entry : golden) {
      pmvis::RleMask rle{entry.at("size")[0].get<int>(), entry.at("size")[1].get<int>(),
                         entry.at("counts").get<std::string>()};
      pmvis::BinaryMask mask = pmvis::rle_decode(rle);
      std::string pixels = entry.at("pixels").get<std::string>();
      for (size_t i = 0; i < mask.data.size(); ++i)
        if ((pixels[i] == '1') != (mask.data[i] == 1)) rle_ok = false;
      if (pmvis::rle_encode(mask).counts != rle.counts) rle_ok = false;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "rle golden: %s\n", e.what());
    rle_ok = false;
  }
  check("rle-golden", rle_ok);

  // Gradient finite-difference suites.
  pmvis::SplitMix64 rng(cfg.seed);
  const pmvis::LossHyperparams& hp = cfg.loss;
  bool dice_ok = true, focal_ok = true, proj_ok = true, pair_ok = true;
  for (int round = 0; round < rounds; ++round) {
    pmvis::ProbGrid grid(8, 8);
    pmvis::BinaryMask target(8, 8);
    pmvis::ColorImage img(8, 8);
    for (size_t i = 0; i < grid.values.size(); ++i) {
      grid.values[i] = rng.next_range(0.05, 0.95);
      target.data[i] = rng.next_bernoulli(0.5) ? 1 : 0;
      for (int ch = 0; ch < 3; ++ch)
        img.channels[ch][i] = rng.next_range(0.0, 0.5);
    }
    pmvis::Box box{1, 1, 5, 5};

    dice_ok = dice_ok && fd_check("dice", [&](const pmvis::ProbGrid& p) {
      return pmvis::dice_loss(p, target, hp.dice_epsilon);
    }, grid, tol, nullptr);
    focal_ok = focal_ok && fd_check("focal", [&](const pmvis::ProbGrid& p) {
      return pmvis::focal_loss(p, target, hp.focal_alpha, hp.focal_gamma,
                               hp.prob_clamp);
    }, grid, tol, nullptr);
    // Skip pixels near a projection-max tie; the subgradient is not two-sided.
    auto near_tie = [](const pmvis::ProbGrid& p, int idx) {
      int r = idx / p.width, c = idx % p.width;
      double margin = 3e-4;
      double rowmax = -1, colmax = -1;
      for (int cc = 0; cc < p.width; ++cc) rowmax = std::max(rowmax, p.at(r, cc));
      for (int rr = 0; rr < p.height; ++rr) colmax = std::max(colmax, p.at(rr, c));
      return std::abs(p.at(r, c) - rowmax) < margin ||
             std::abs(p.at(r, c) - colmax) < margin;
    };
    proj_ok = proj_ok && fd_check("projection", [&](const pmvis::ProbGrid& p) {
      return pmvis::boxinst_projection_loss(p, box, hp.dice_epsilon);
    }, grid, tol, near_tie);
    pair_ok = pair_ok && fd_check("pairwise", [&](const pmvis::ProbGrid& p) {
      return pmvis::boxinst_pairwise_loss(p, img, box, hp.pairwise_threshold,
                                          hp.pairwise_dilation, hp.pairwise_theta,
                                          hp.prob_clamp);
    }, grid, tol, nullptr);
  }
  check("dice-gradient", dice_ok);
  check("focal-gradient", focal_ok);
  check("projection-gradient", proj_ok);
  check("pairwise-gradient", pair_ok);

  bool policy_ok =
      pmvis::select_policy(pmvis::AnnotationKind::kPixelMask,
                           pmvis::TrainingStage::kImageStage) ==
          pmvis::LossPolicy{true, false, true} &&
      pmvis::select_policy(pmvis::AnnotationKind::kPseudoMask,
                           pmvis::TrainingStage::kVideoStage) ==
          pmvis::LossPolicy{true, true, true} &&
      pmvis::select_policy(pmvis::AnnotationKind::kBoxOnly,
                           pmvis::TrainingStage::kImageStage) ==
          pmvis::LossPolicy{false, false, false};
  check("policy-fixtures", policy_ok);

  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-label curation and evaluation toolkit for video "
               "instance segmentation"};
  app.require_subcommand(1);

  std::string config_path, out_path, dataset_path, kind = "pixel";
  std::string preds_path, gt_path, param, golden_path = "fixtures/rle_golden.json";
  std::vector<double> values;
  std::optional<uint64_t> seed_override;
  std::optional<int> jobs_override;
  double tol = 1e-5;
  int rounds = 50;

  CLI::App* stats = app.add_subcommand("stats", "per-category dataset statistics");
  stats->add_option("dataset", dataset_path, "dataset JSON path")->required();
  stats->add_option("--kind", kind, "image dataset kind: pixel or box-only");

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  gen->add_option("--config", config_path)->required();
  gen->add_option("--out", out_path, "output directory")->required();
  gen->add_option("--seed", seed_override);

  CLI::App* curate = app.add_subcommand("curate", "optimize and filter pseudo-labels");
  curate->add_option("--config", config_path)->required();
  curate->add_option("--out", out_path, "pseudo-label output path");
  curate->add_option("--jobs", jobs_override);

  CLI::App* eval = app.add_subcommand("eval", "evaluate predictions against ground truth");
  eval->add_option("--config", config_path);
  eval->add_option("--preds", preds_path)->required();
  eval->add_option("--gt", gt_path)->required();
  eval->add_option("--out", out_path, "report JSON path");

  CLI::App* sweep = app.add_subcommand("sweep", "curate+eval over K or tau values");
  sweep->add_option("--config", config_path)->required();
  sweep->add_option("--param", param, "K or tau")->required();
  sweep->add_option("--values", values)->required()->delimiter(',');
  sweep->add_option("--out", out_path, "sweep table JSON path");
  sweep->add_option("--jobs", jobs_override);

  CLI::App* selfcheck = app.add_subcommand("selfcheck", "gradient and codec self-tests");
  selfcheck->add_option("--config", config_path);
  selfcheck->add_option("--golden", golden_path, "RLE golden fixture path");
  selfcheck->add_option("--tol", tol, "gradient check tolerance");
  selfcheck->add_option("--rounds", rounds, "random instances per kernel");
  selfcheck->add_option("--seed", seed_override);

  CLI11_PARSE(app, argc, argv);

  try {
    pmvis::PipelineConfig cfg;
    if (!config_path.empty()) cfg = pmvis::load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (jobs_override) cfg.jobs = *jobs_override;
    if (!out_path.empty() && curate->parsed()) cfg.out_path = out_path;

    if (stats->parsed()) return cmd_stats(dataset_path, kind);
    if (gen->parsed()) {
      if (seed_override) cfg.corpus.seed = *seed_override;
      return cmd_gen(cfg, out_path);
    }
    if (curate->parsed()) {
      if (cfg.out_path.empty())
        throw pmvis::SchemaError("curate needs an output path (--out or config)");
      return cmd_curate(cfg);
    }
    if (eval->parsed()) return cmd_eval(preds_path, gt_path, cfg, out_path);
    if (sweep->parsed()) return cmd_sweep(cfg, param, values, out_path);
    if (selfcheck->parsed()) return cmd_selfcheck(cfg, golden_path, tol, rounds);
  } catch (const pmvis::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
