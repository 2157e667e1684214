#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "rotodt/experiment.hpp"
#include "rotodt/parallel.hpp"

using namespace rotodt;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string output;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<int> slice;
  std::string samples;
  std::string truth_path;
  std::string test_path;
};

ExperimentConfig config_from(const Options& o) {
  ExperimentConfig c = o.config.empty() ? parse_config(json::object()) : load_config(o.config);
  if (o.seed) c.noise.seed = *o.seed;
  if (!o.output.empty()) c.output = o.output;
  return c;
}

void check_slice(const Options& o, int N) {
  if (o.slice && (*o.slice < -N / 2 || *o.slice >= N / 2))
    throw InvalidArgument("--slice " + std::to_string(*o.slice) + " outside [" +
                          std::to_string(-N / 2) + ", " + std::to_string(N / 2 - 1) + "]");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_forward(const Options& o) {
  const Experiment ex(config_from(o));
  const KSpaceSamples s = simulate(ex);
  const fs::path dir = ex.config.output;
  fs::create_directories(dir);
  write_samples(dir / "samples.bin", s, samples_metadata(ex, s));
  std::cout << "wrote " << s.size() << " samples (" << ex.design.S() << " angles x "
            << ex.design.per_angle() << ") to " << (dir / "samples.bin").string() << '\n';
  return 0;
}

int cmd_reconstruct(const Options& o) {
  const Experiment ex(config_from(o));
  check_slice(o, ex.config.N);
  const auto t0 = std::chrono::steady_clock::now();
  KSpaceSamples s;
  if (!o.samples.empty()) {
    s = read_samples(o.samples).samples;
    check_samples_match(ex, s);
  } else {
    s = simulate(ex);
  }
  const double t_data = seconds_since(t0);
  const auto t1 = std::chrono::steady_clock::now();
  const Volume truth = truth_volume(ex);
  const double t_truth = seconds_since(t1);

  RunResult run = run_reconstruction(ex, s, &truth);
  run.report.timings["data"] = t_data;
  run.report.timings["truth"] = t_truth;
  json report = report_json(ex, run);
  report["samples"] = o.samples.empty() ? json("generated from config") : json(o.samples);

  const fs::path dir = ex.config.output;
  fs::create_directories(dir);
  const json meta = {{"method", to_string(ex.config.recon.method)},
                     {"chosen_iteration", run.report.choice.index}};
  write_volume(dir / "volume.bin", run.report.volume, meta);
  write_volume(dir / "truth.bin", truth,
               {{"truth", "voxel means, factor " + std::to_string(ex.config.truth_factor)}});
  if (o.slice) write_png_slice(dir / ("slice_" + std::to_string(*o.slice) + ".png"),
                               run.report.volume, *o.slice);
  write_json(dir / "report.json", report);

  std::cout << to_string(ex.config.recon.method) << ": iteration " << run.report.choice.index
            << (run.report.choice.flagged ? " (flagged: " + run.report.choice.note + ")" : "")
            << ", PSNR " << run.quality->psnr << " dB, SSIM " << run.quality->ssim << '\n';
  return 0;
}

int cmd_compare(const Options& o) {
  const VolumeFile a = read_volume(o.truth_path);
  const VolumeFile b = read_volume(o.test_path);
  if (a.volume.grid.N != b.volume.grid.N)
    throw InvalidArgument("grid size mismatch: " + std::to_string(a.volume.grid.N) + " vs " +
                          std::to_string(b.volume.grid.N));
  std::cout << quality_json(quality(a.volume, b.volume)).dump(2) << '\n';
  return 0;
}

int cmd_validate(const Options& o) {
  const ExperimentConfig c = config_from(o);
  const json table = run_validation(c.validation, c.wavelength);
  if (!o.output.empty()) {
    fs::create_directories(o.output);
    write_json(fs::path(o.output) / "validation.json", table);
  }
  std::cout << "n_o  relative_error  discrete_error  seconds\n";
  for (const json& r : table["rows"]) {
    std::ostringstream line;
    line << std::setw(3) << r["n_o"].get<int>() << "  " << std::scientific << std::setprecision(4)
         << std::setw(14) << r["relative_error"].get<double>() << "  " << std::setw(14)
         << r["discrete_relative_error"].get<double>() << "  " << std::fixed << std::setprecision(2)
         << r["seconds"].get<double>();
    std::cout << line.str() << '\n';
  }
  std::cout << "monotone decrease: " << (table["monotone_decrease"].get<bool>() ? "yes" : "no") << '\n';
  return 0;
}

int cmd_design_dump(const Options& o) {
  const Experiment ex(config_from(o));
  const json summary = design_summary(ex);
  if (o.output.empty()) {
    std::cout << summary.dump(2) << '\n';
    return 0;
  }
  const auto points = ex.points();
  fs::create_directories(o.output);
  {
    AtomicFile csv(fs::path(o.output) / "design.csv");
    {
      std::ofstream out(csv.temp_path());
      out.precision(17);
      write_design_csv(out, ex.design, points);
      out.flush();
      if (!out) throw Error("write failed: " + csv.temp_path().string());
    }
    csv.commit();
  }
  write_json(fs::path(o.output) / "design.json", summary);
  std::cout << "wrote " << points.size() << " points to " << (fs::path(o.output) / "design.csv").string()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffraction tomography of rotating objects: forward data, reconstruction, metrics"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", o.config, "experiment JSON")->check(CLI::ExistingFile);
    sub->add_option("--output", o.output, "output directory (overrides config)");
    sub->add_option("--threads", o.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  };

  auto* fwd = app.add_subcommand("forward", "synthesize k-space samples");
  common(fwd, true);
  fwd->add_option("--seed", o.seed, "noise seed (overrides config)");

  auto* rec = app.add_subcommand("reconstruct", "reconstruct a volume and write a report");
  common(rec, true);
  rec->add_option("--seed", o.seed, "noise seed (overrides config)");
  rec->add_option("--samples", o.samples, "samples file from `forward`")->check(CLI::ExistingFile);
  rec->add_option("--slice", o.slice, "export the slice j1 = INDEX as PNG");

  auto* cmp = app.add_subcommand("compare", "PSNR / SSIM / RMSE of two volume files");
  cmp->add_option("truth", o.truth_path)->required()->check(CLI::ExistingFile);
  cmp->add_option("test", o.test_path)->required()->check(CLI::ExistingFile);

  auto* val = app.add_subcommand("validate", "Green's function check of the diffraction relation");
  common(val, true);

  auto* dump = app.add_subcommand("design-dump", "sampling design summary, CSV with --output");
  common(dump, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    set_num_threads(o.threads);
    if (fwd->parsed()) return cmd_forward(o);
    if (rec->parsed()) return cmd_reconstruct(o);
    if (cmp->parsed()) return cmd_compare(o);
    if (val->parsed()) return cmd_validate(o);
    if (dump->parsed()) return cmd_design_dump(o);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
