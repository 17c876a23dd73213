#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "maskwarp/error.hpp"
#include "maskwarp/mask_ops.hpp"
#include "maskwarp/optimizer.hpp"

namespace maskwarp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Rounds given without matching weight lists keep the last R entries of
// the default schedule; explicit lists must already have R entries.
void set_rounds(RunConfig& config, int rounds) {
  if (rounds < 1) throw InvalidArgument("rounds must be >= 1");
  const WarpSchedule defaults;
  auto fit = [&](std::vector<double>& weights, bool given, const std::vector<double>& fallback, const char* name) {
    if (static_cast<int>(weights.size()) == rounds) return;
    if (!given && rounds <= static_cast<int>(fallback.size())) {
      weights.assign(fallback.end() - rounds, fallback.end());
      return;
    }
    throw InvalidArgument(std::string(name) + " has " + std::to_string(weights.size()) +
                          " entries but rounds is " + std::to_string(rounds));
  };
  fit(config.schedule.alpha, config.alpha_given, defaults.alpha, "alpha");
  fit(config.schedule.beta, config.beta_given, defaults.beta, "beta");
}

Rgb parse_colour(const std::string& text) {
  auto bad = [&] { return InvalidArgument("label colour '" + text + "' is not of the form #rrggbb"); };
  if (text.size() != 7 || text[0] != '#') throw bad();
  Rgb rgb{};
  for (int i = 0; i < 3; ++i) {
    const std::string hex = text.substr(1 + 2 * i, 2);
    if (!std::all_of(hex.begin(), hex.end(), [](unsigned char c) { return std::isxdigit(c); })) throw bad();
    rgb[i] = static_cast<std::uint8_t>(std::stoi(hex, nullptr, 16));
  }
  return rgb;
}

BinaryMask foreground(const LabelMask& labels) {
  std::vector<std::uint8_t> bits(labels.size());
  std::transform(labels.values().begin(), labels.values().end(), bits.begin(),
                 [](std::uint32_t l) { return static_cast<std::uint8_t>(l != 0); });
  return BinaryMask(labels.height(), labels.width(), std::move(bits));
}

void require(const fs::path& path, const char* what) {
  if (path.empty()) throw InvalidArgument(std::string("missing required input: ") + what);
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    if (!e.trace_csv().empty()) err << "trace before failure:\n" << e.trace_csv();
    return kNumerical;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

std::string format_number(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

// ------------------------------------------------------------- batch eval

struct ManifestEntry {
  fs::path pred;
  fs::path gt;
};

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<ManifestEntry> read_manifest(const fs::path& manifest) {
  std::istringstream in(read_file(manifest));
  const fs::path base = manifest.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw IoError(manifest.string() + ":" + std::to_string(line_no) + ": expected pred_path,gt_path");
    }
    const std::string pred = trim(line.substr(0, comma));
    const std::string gt = trim(line.substr(comma + 1));
    if (entries.empty() && pred == "pred_path" && gt == "gt_path") continue;
    if (pred.empty() || gt.empty() || gt.find(',') != std::string::npos) {
      throw IoError(manifest.string() + ":" + std::to_string(line_no) + ": expected pred_path,gt_path");
    }
    auto resolve = [&](const fs::path& p) { return p.is_absolute() ? p : base / p; };
    entries.push_back({resolve(pred), resolve(gt)});
  }
  if (entries.empty()) throw IoError(manifest.string() + ": manifest has no entries");
  return entries;
}

// Runs score(i) for i in [0, n) on up to `jobs` threads. Workers stop
// picking up entries after the first failure; the failure with the lowest
// index is rethrown.
std::vector<std::vector<double>> score_all(std::size_t n, int jobs,
                                           const std::function<std::vector<double>(std::size_t)>& score) {
  std::vector<std::vector<double>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        results[i] = score(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  {
    const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, n);
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace

void apply_json(RunConfig& c, const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");

  std::optional<int> rounds;
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "source") c.source = value.get<std::string>();
      else if (key == "source_mask") c.source_mask = value.get<std::string>();
      else if (key == "target_mask") c.target_mask = value.get<std::string>();
      else if (key == "source_labels") c.source_labels = value.get<std::string>();
      else if (key == "target_labels") c.target_labels = value.get<std::string>();
      else if (key == "field") c.field = value.get<std::string>();
      else if (key == "out") c.out = value.get<std::string>();
      else if (key == "label_colors") {
        c.label_colors.clear();
        for (const auto& [colour, label] : value.items()) {
          c.label_colors[parse_colour(colour)] = label.get<std::uint32_t>();
        }
      }
      else if (key == "alpha") {
        c.schedule.alpha = value.get<std::vector<double>>();
        c.alpha_given = true;
      }
      else if (key == "beta") {
        c.schedule.beta = value.get<std::vector<double>>();
        c.beta_given = true;
      }
      else if (key == "gamma") c.schedule.gamma = value.get<double>();
      else if (key == "rounds") rounds = value.get<int>();
      else if (key == "kernel") c.schedule.edge_kernel = value.get<int>();
      else if (key == "init") c.schedule.init = parse_init_mode(value.get<std::string>());
      else if (key == "iters_per_level") c.schedule.iters_per_level = value.get<int>();
      else if (key == "pyramid_levels") c.schedule.pyramid_levels = value.get<int>();
      else if (key == "step_size") c.schedule.step_size = value.get<double>();
      else if (key == "soften_sigma") c.schedule.soften_sigma = value.get<double>();
      else if (key == "update_sigma") c.schedule.update_sigma = value.get<double>();
      else if (key == "max_rejections") c.schedule.max_rejections = value.get<int>();
      else if (key == "correlation_channels") c.schedule.correlation_channels = value.get<int>();
      else if (key == "save_field") c.save_field = value.get<bool>();
      else if (key == "save_intermediates") c.save_intermediates = value.get<bool>();
      else if (key == "save_trace") c.save_trace = value.get<bool>();
      else if (key == "jobs") c.jobs = value.get<int>();
      else if (key == "lambda") c.ir.lambda = value.get<double>();
      else if (key == "mu") c.ir.mu = value.get<double>();
      else if (key == "m_p") c.ir.m_p = value.get<double>();
      else if (key == "m_n") c.ir.m_n = value.get<double>();
      else if (key == "beta_d") c.ir.beta_d = value.get<double>();
      else if (key == "tau") c.ir.tau = value.get<double>();
      else if (key == "homography") {
        const auto m = value.get<std::vector<double>>();
        if (m.size() != 9) throw InvalidArgument("homography needs 9 entries");
        std::copy(m.begin(), m.end(), c.ir.homography.m.begin());
      }
      else if (key == "ssim_window") c.ssim.window = value.get<int>();
      else if (key == "ssim_sigma") c.ssim.sigma = value.get<double>();
      else if (key == "ssim_k1") c.ssim.k1 = value.get<double>();
      else if (key == "ssim_k2") c.ssim.k2 = value.get<double>();
      else if (key == "ssim_dynamic_range") c.ssim.dynamic_range = value.get<double>();
      else throw InvalidArgument("unknown config key '" + key + "'");
    } catch (const json::exception& e) {
      throw InvalidArgument("config key '" + key + "': " + e.what());
    }
  }
  if (rounds) set_rounds(c, *rounds);
}

int cmd_warp(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const bool regions = !config.source_labels.empty() || !config.target_labels.empty();
    require(config.source, "--source image");
    if (regions) {
      require(config.source_labels, "--source-labels");
      require(config.target_labels, "--target-labels");
    } else {
      require(config.source_mask, "--source-mask");
      require(config.target_mask, "--target-mask");
    }
    for (const auto& warning : config.schedule.validate()) err << "warning: " << warning << '\n';

    const ImageBuffer image = read_image(config.source);
    WarpResult result;
    BinaryMask source;
    BinaryMask target;
    if (regions) {
      const LabelMask src = read_labels(config.source_labels, config.label_colors);
      const LabelMask tgt = read_labels(config.target_labels, config.label_colors);
      source = foreground(src);
      target = foreground(tgt);
      result = optimize_regions(image, src, tgt, config.schedule);
    } else {
      source = read_mask(config.source_mask);
      target = read_mask(config.target_mask);
      result = optimize(image, source, target, config.schedule);
    }

    // Outputs are rendered from the fields as stored on disk, so that
    // apply-field on a saved field reproduces the images exactly.
    std::vector<WarpField> fields;
    for (const auto& f : result.fields) fields.push_back(round_to_f32(f));
    const ImageBuffer warped = warp_apply(fields.back(), image);
    const BinaryMask warped_mask = binarize(warp_apply(fields.back(), SoftMask::from(source)));
    const double final_iou = iou(warped_mask, target);

    std::vector<ImageBuffer> intermediates;
    if (config.save_intermediates) {
      for (const auto& f : fields) intermediates.push_back(warp_apply(f, image));
    }

    fs::create_directories(config.out);
    write_image(config.out / "N.png", warped);
    write_mask(config.out / "N_mask.png", warped_mask);
    if (config.save_trace) {
      std::ostringstream csv;
      write_trace_csv(csv, result.traces);
      write_file_atomic(config.out / "trace.csv", csv.str());
    }
    for (std::size_t r = 0; r < fields.size(); ++r) {
      const std::string n = std::to_string(r + 1);
      if (config.save_field) write_field(config.out / ("field_r" + n + ".wfld"), fields[r]);
      if (config.save_intermediates) write_image(config.out / ("N_" + n + ".png"), intermediates[r]);
    }
    out << "iou " << format_number(final_iou) << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_smoothmask(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(config.source_mask, "--source-mask");
    require(config.target_mask, "--target-mask");
    const BinaryMask src = read_mask(config.source_mask);
    const BinaryMask tgt = read_mask(config.target_mask);
    const BinaryMask m = smoothness_mask(src, tgt, config.schedule.edge_kernel);
    fs::create_directories(config.out);
    write_mask(config.out / "M_smooth.png", m);
    out << "pixels " << m.count() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_apply_field(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(config.source, "--source image");
    require(config.field, "--field");
    const ImageBuffer image = read_image(config.source);
    const WarpField field = read_field(config.field);
    const ImageBuffer warped = warp_apply(field, image);
    fs::create_directories(config.out);
    write_image(config.out / "warped.png", warped);
    out << "wrote " << (config.out / "warped.png").string() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_eval(const std::string& kind, const fs::path& manifest, const RunConfig& config,
             std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (kind != "miou" && kind != "ssim" && kind != "ir") {
      throw InvalidArgument("unknown eval kind '" + kind + "' (expected miou|ssim|ir)");
    }
    if (kind == "ssim") config.ssim.validate();
    if (kind == "ir") config.ir.validate();
    const auto entries = read_manifest(manifest);

    const auto scores = score_all(entries.size(), config.jobs, [&](std::size_t i) -> std::vector<double> {
      const auto& e = entries[i];
      if (kind == "miou") return {iou(read_mask(e.pred), read_mask(e.gt))};
      if (kind == "ssim") return {ssim(read_image(e.pred), read_image(e.gt), config.ssim)};
      const IRLoss l = ir_loss(read_heads(e.pred), read_heads(e.gt), config.ir);
      return {l.total, l.point, l.desc};
    });

    const std::vector<std::string> columns =
        kind == "ir" ? std::vector<std::string>{"total", "point", "desc"}
                     : std::vector<std::string>{kind == "miou" ? "iou" : "ssim"};
    std::vector<double> mean(columns.size(), 0.0);
    std::ostringstream pairs;
    pairs << "pred_path,gt_path";
    for (const auto& c : columns) pairs << ',' << c;
    pairs << '\n';
    for (std::size_t i = 0; i < entries.size(); ++i) {
      pairs << entries[i].pred.string() << ',' << entries[i].gt.string();
      for (std::size_t k = 0; k < columns.size(); ++k) {
        pairs << ',' << format_number(scores[i][k]);
        mean[k] += scores[i][k];
      }
      pairs << '\n';
    }
    std::ostringstream summary;
    summary << "metric,value,count\n";
    for (std::size_t k = 0; k < columns.size(); ++k) {
      mean[k] /= static_cast<double>(entries.size());
      const std::string name = kind == "miou" ? "miou" : "mean_" + columns[k];
      summary << name << ',' << format_number(mean[k]) << ',' << entries.size() << '\n';
    }

    if (!config.out.empty()) {
      fs::create_directories(config.out);
      write_file_atomic(config.out / (kind + "_pairs.csv"), pairs.str());
      write_file_atomic(config.out / (kind + "_summary.csv"), summary.str());
    }
    out << pairs.str() << summary.str();
    return static_cast<int>(kOk);
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mask-guided warping and evaluation", "maskwarp"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path, out_dir;
  std::optional<int> jobs;
  app.add_option("--config", config_path, "JSON run configuration (flags override its keys)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--jobs", jobs, "Worker threads for batch evaluation")->check(CLI::PositiveNumber);

  std::optional<std::string> source, source_mask, target_mask, source_labels, target_labels, field, init;
  std::optional<int> kernel, rounds, iters;
  std::optional<double> gamma;
  std::vector<double> alpha, beta;

  auto* warp = app.add_subcommand("warp", "Warp a source object onto a target silhouette");
  warp->add_option("--source", source, "Source image PNG");
  warp->add_option("--source-mask", source_mask, "Source mask PNG");
  warp->add_option("--target-mask", target_mask, "Target mask PNG");
  warp->add_option("--source-labels", source_labels, "Source label PNG (region mode)");
  warp->add_option("--target-labels", target_labels, "Target label PNG (region mode)");
  warp->add_option("--kernel", kernel, "Edge-band kernel size");
  warp->add_option("--rounds", rounds, "Number of rounds");
  warp->add_option("--alpha", alpha, "Shape weights per round")->delimiter(',');
  warp->add_option("--beta", beta, "Smoothness weights per round")->delimiter(',');
  warp->add_option("--gamma", gamma, "Global smoothness scale");
  warp->add_option("--init", init, "zero|centroid|correlation");
  warp->add_option("--iters", iters, "Iteration budget per pyramid level");
  auto* save_field = warp->add_flag("--save-field", "Write one WFLD file per round");
  auto* save_inter = warp->add_flag("--save-intermediates", "Write N_1..N_R");

  auto* smooth = app.add_subcommand("smoothmask", "Write the smoothness mask of a mask pair");
  smooth->add_option("--source-mask", source_mask, "Source mask PNG");
  smooth->add_option("--target-mask", target_mask, "Target mask PNG");
  smooth->add_option("--kernel", kernel, "Edge-band kernel size");

  auto* apply = app.add_subcommand("apply-field", "Warp an image with a stored field");
  apply->add_option("--source", source, "Image PNG");
  apply->add_option("--field", field, "WFLD file");

  std::string kind;
  std::string manifest;
  auto* eval = app.add_subcommand("eval", "Score a manifest of pred_path,gt_path pairs");
  eval->add_option("kind", kind, "miou|ssim|ir")->required();
  eval->add_option("manifest", manifest, "Manifest CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kUsage;
  }

  RunConfig config;
  if (eval->parsed()) config.out.clear();
  const int status = guarded(err, [&] {
    if (config_path) apply_json(config, read_file(*config_path));
    if (out_dir) config.out = *out_dir;
    if (jobs) config.jobs = *jobs;
    if (source) config.source = *source;
    if (source_mask) config.source_mask = *source_mask;
    if (target_mask) config.target_mask = *target_mask;
    if (source_labels) config.source_labels = *source_labels;
    if (target_labels) config.target_labels = *target_labels;
    if (field) config.field = *field;
    if (kernel) config.schedule.edge_kernel = *kernel;
    if (!alpha.empty()) {
      config.schedule.alpha = alpha;
      config.alpha_given = true;
    }
    if (!beta.empty()) {
      config.schedule.beta = beta;
      config.beta_given = true;
    }
    if (rounds) set_rounds(config, *rounds);
    if (gamma) config.schedule.gamma = *gamma;
    if (init) config.schedule.init = parse_init_mode(*init);
    if (iters) config.schedule.iters_per_level = *iters;
    if (save_field->count() > 0) config.save_field = true;
    if (save_inter->count() > 0) config.save_intermediates = true;
    if (config.jobs < 1) throw InvalidArgument("jobs must be >= 1");
    config.schedule.validate();
    return static_cast<int>(kOk);
  });
  if (status != kOk) return status;

  if (warp->parsed()) return cmd_warp(config, out, err);
  if (smooth->parsed()) return cmd_smoothmask(config, out, err);
  if (apply->parsed()) return cmd_apply_field(config, out, err);
  return cmd_eval(kind, manifest, config, out, err);
}

}  // namespace maskwarp::cli
