#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "rotodt/experiment.hpp"
#include "rotodt/io.hpp"

using namespace rotodt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "rotodt_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::size_t files_in(const fs::path& dir) {
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
  return n;
}

}  // namespace

TEST_CASE("volume round trip") {
  Volume v(build_grid(6, 1.5));
  for (std::size_t i = 0; i < v.size(); ++i) v.values[i] = 0.25 * static_cast<double>(i) - 3.0;
  const fs::path p = scratch("vol.bin");
  write_volume(p, v, {{"label", "ramp"}});
  const VolumeFile f = read_volume(p);
  CHECK(f.volume.grid == v.grid);
  CHECK(f.header["meta"]["label"] == "ramp");
  for (std::size_t i = 0; i < v.size(); ++i)
    CHECK(f.volume.values[i].real() == static_cast<float>(v.values[i].real()));
  CHECK(fs::file_size(p) == 16 + 8 + f.header.dump().size() + 4 * v.size());

  std::ofstream(scratch("junk.bin")) << "not a volume";
  CHECK_THROWS_AS(read_volume(scratch("junk.bin")), Error);
}

TEST_CASE("samples round trip with sidecar") {
  KSpaceSamples s;
  s.imaging = Imaging::kReflection;
  for (int i = 0; i < 7; ++i) {
    s.points.emplace_back(0.1 * i, -0.2 * i, 0.3);
    s.values.emplace_back(i, -0.5 * i);
  }
  s.noise = NoiseRecord{0.02, 0.01, 99, true};
  const fs::path p = scratch("s.bin");
  write_samples(p, s, {{"N", 4}});
  CHECK(fs::exists(sidecar_path(p)));
  CHECK(fs::file_size(p) == 7 * 5 * sizeof(double));
  const SamplesFile f = read_samples(p);
  CHECK(f.sidecar["N"] == 4);
  CHECK(f.samples.imaging == Imaging::kReflection);
  REQUIRE(f.samples.noise);
  CHECK(f.samples.noise->seed == 99);
  CHECK(f.samples.noise->complex_noise);
  for (int i = 0; i < 7; ++i) {
    CHECK(f.samples.points[i] == s.points[i]);
    CHECK(f.samples.values[i] == s.values[i]);
  }
}

TEST_CASE("png slice") {
  Volume v(build_grid(8, 1.0));
  for (int a = -4; a < 4; ++a)
    for (int b = -4; b < 4; ++b)
      for (int c = -4; c < 4; ++c) v.at(a, b, c) = a + b + c;
  const fs::path p = scratch("slice.png");
  write_png_slice(p, v, 0);
  std::ifstream in(p, std::ios::binary);
  char sig[8];
  in.read(sig, 8);
  CHECK(std::string(sig + 1, 3) == "PNG");
  CHECK_THROWS_AS(write_png_slice(scratch("bad.png"), v, 4), InvalidArgument);
  CHECK_FALSE(fs::exists(scratch("bad.png")));
}

TEST_CASE("failed writes leave nothing behind") {
  const fs::path dir = scratch("atomic");
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    AtomicFile f(dir / "out.bin");
    std::ofstream(f.temp_path()) << "partial";
  }
  CHECK(files_in(dir) == 0);
  KSpaceSamples bad;
  bad.points.resize(2);
  bad.values.resize(1);
  CHECK_THROWS(write_samples(dir / "x.bin", bad, json::object()));
  CHECK(files_in(dir) == 0);
}

TEST_CASE("config parsing") {
  const ExperimentConfig d = parse_config(json::object());
  CHECK(d.N == 80);
  CHECK(d.resolved_support_radius() == doctest::Approx(80 / (4 * std::sqrt(2.0))));
  CHECK(d.resolved_detector_distance() == doctest::Approx(2 * d.resolved_support_radius()));

  const json j = json::parse(R"({
    "N": 16, "support_radius": 2.5, "angles": 12,
    "trajectory": {"kind": "fixed-axis", "axis": [0, 1, 0], "range": [0, "pi"]},
    "phantom": {"kind": "ball-with-gap", "radius": 2, "half_width": 0.3},
    "noise": {"relative_level": 0.01, "seed": 5},
    "recon": {"method": "backprop", "indicatrix": "analytic"}
  })");
  const ExperimentConfig c = parse_config(j);
  CHECK(c.trajectory.to == doctest::Approx(kPi));
  CHECK(c.trajectory.axis.y() == 1.0);
  CHECK(c.noise.seed == 5);
  CHECK(c.recon.method == ReconMethod::kBackprop);

  // echo parses back to the same experiment
  const ExperimentConfig back = parse_config([&] {
    json e = to_json(c);
    e["wave"].erase("k0");
    e["noise"].erase("model");
    return e;
  }());
  CHECK(back.N == c.N);
  CHECK(back.angles == 12);
  CHECK(back.phantom.half_width == c.phantom.half_width);
  CHECK(back.trajectory.to == c.trajectory.to);

  auto rejects = [](const char* text, const char* needle) {
    try {
      parse_config(json::parse(text));
    } catch (const InvalidArgument& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
      return;
    }
    FAIL("accepted " << text);
  };
  rejects(R"({"N": 81})", "even");
  rejects(R"({"N": 16, "support_radius": 9})", "coarse");
  rejects(R"({"bogus": 1})", "bogus");
  rejects(R"({"recon": {"mehtod": "cgne"}})", "recon.mehtod");
  rejects(R"({"phantom": {"kind": "cube"}})", "phantom.kind");
  rejects(R"({"data": {"factor": 4}})", "factor");
  rejects(R"({"N": "big"})", "N");
  rejects(R"({"trajectory": {"range": [1, 0]}})", "increasing");
}

TEST_CASE("experiment checks samples against its design") {
  ExperimentConfig c = parse_config(json::parse(R"({"N": 8, "support_radius": 1.4,
      "phantom": {"kind": "ball", "radius": 1}})"));
  const Experiment ex(c);
  const KSpaceSamples s = simulate(ex);
  CHECK(s.size() == ex.design.size());
  CHECK_NOTHROW(check_samples_match(ex, s));
  KSpaceSamples moved = s;
  moved.points[3].x() += 0.1;
  CHECK_THROWS_AS(check_samples_match(ex, moved), InvalidArgument);
  KSpaceSamples shorter = s;
  shorter.points.pop_back();
  shorter.values.pop_back();
  CHECK_THROWS_AS(check_samples_match(ex, shorter), InvalidArgument);

  c.phantom.radius = 2.0;
  CHECK_THROWS_AS(Experiment{c}, InvalidArgument);

  const json summary = design_summary(ex);
  CHECK(summary["conventions"].size() == 2);
  CHECK(summary["total"] == ex.design.size());
}

TEST_CASE("analytic data needs a closed form") {
  const json j = json::parse(R"({"N": 16, "support_radius": 2.5,
      "phantom": {"kind": "ball-with-gap", "radius": 2, "half_width": 0.3}})");
  CHECK_THROWS_AS(Experiment{parse_config(j)}, InvalidArgument);
  json k = j;
  k["data"] = {{"source", "fine-grid"}, {"factor", 3}};
  const Experiment ex(parse_config(k));
  CHECK(simulate(ex).size() == ex.design.size());
}
