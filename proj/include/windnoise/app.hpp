#pragma once

// Command implementations behind the `windnoise` CLI. Each returns the
// process exit status:
//   0 success, 1 validation failure, 2 invalid configuration or arguments,
//   3 I/O failure, 4 model error (coherence matrix not factorizable).

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "windnoise/coherence_analysis.hpp"
#include "windnoise/config.hpp"
#include "windnoise/engine.hpp"
#include "windnoise/error.hpp"
#include "windnoise/wav.hpp"

namespace windnoise::app {

enum ExitCode : int {
  kOk = 0,
  kValidationFailed = 1,
  kConfigInvalid = 2,
  kIoFailure = 3,
  kModelFailure = 4,
};

inline int run_guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const ArgumentError& e) {
    err << "argument error: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << '\n';
    return kModelFailure;
  }
}

// <stem>_micN<ext> for split mono output.
inline std::string split_path(const std::string& path, std::size_t mic) {
  std::filesystem::path p(path);
  auto name = p.stem().string() + "_mic" + std::to_string(mic) + p.extension().string();
  return (p.parent_path() / name).string();
}

// Summary CSV lives next to the report: <stem>.nmse.csv
inline std::string summary_path(const std::string& report_path) {
  std::filesystem::path p(report_path);
  return (p.parent_path() / (p.stem().string() + ".nmse.csv")).string();
}

inline int cmd_generate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    const auto sim = to_simulation_config(rc);
    const auto result = generate(sim);
    const auto format = rc.output_format == "pcm16" ? SampleFormat::pcm16 : SampleFormat::float32;
    const RngStream dither{rc.seed, 0xD17E4};
    if (rc.split) {
      for (std::size_t c = 0; c < result.signals.num_channels(); ++c) {
        MultichannelBuffer mono{{result.signals.channels[c]}, result.signals.sample_rate_hz};
        const auto path = split_path(rc.output, c + 1);
        write_wav(path, mono, format, {dither.seed, dither.stream_id + c});
        out << "wrote " << path << '\n';
      }
    } else {
      write_wav(rc.output, result.signals, format, dither);
      out << "wrote " << rc.output << '\n';
    }
    out << "channels: " << result.signals.num_channels() << ", samples per channel: " << result.signals.num_samples()
        << '\n';
    out << "seed: " << rc.seed << '\n';
    out << std::setprecision(17) << "normalization gain: " << result.normalization_gain << '\n';
    if (result.max_regularization > 0.0) {
      out << std::setprecision(6) << "max coherence regularization: " << result.max_regularization << '\n';
    }
    return int{kOk};
  });
}

inline int cmd_analyze(const std::string& input_wav, const RunConfig& rc, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    auto sim = to_simulation_config(rc);
    const auto buffer = read_wav(input_wav);
    if (buffer.num_channels() != rc.channels) {
      throw ConfigError("input has " + std::to_string(buffer.num_channels()) + " channels but the configuration declares " +
                        std::to_string(rc.channels));
    }
    if (std::abs(buffer.sample_rate_hz - rc.sample_rate) > 1e-6) {
      throw ConfigError("input sample rate differs from the configured sample_rate");
    }
    const auto est = estimate_coherence(buffer, sim.window, sim.corcos.fft_length);
    const auto report = coherence_report(est, sim.corcos, rc.band_limit);

    std::ofstream csv(rc.report);
    if (!csv) throw IoError("cannot write report '" + rc.report + "'");
    write_report_csv(report, csv);
    const auto spath = summary_path(rc.report);
    std::ofstream summary(spath);
    if (!summary) throw IoError("cannot write summary '" + spath + "'");
    write_summary_csv(report, summary);

    out << "frames averaged: " << est.num_frames_averaged << '\n';
    for (const auto& s : report.summary) {
      out << "nMSE mic " << s.i + 1 << "-" << s.j + 1 << ": " << std::setprecision(6) << s.nmse.value;
      if (s.nmse.bins_missing) out << " (" << s.nmse.bins_missing << " undefined bins skipped)";
      out << '\n';
    }
    return int{kOk};
  });
}

// --- validate -------------------------------------------------------------

inline constexpr double kNmseThreshold = 0.05;
inline constexpr double kCrosswindImagThreshold = 0.05;

struct ValidationScene {
  std::string name;
  std::size_t channels;
  double spacing;
  double speed;
  double doa;
};

inline std::vector<ValidationScene> validation_scenes() {
  return {
      {"crosswind-4mm", 2, 0.004, 1.8, std::numbers::pi / 2.0},
      {"downwind-20mm", 2, 0.020, 2.8, 0.0},
      {"crosswind-4mm-4mic", 4, 0.004, 1.8, std::numbers::pi / 2.0},
  };
}

struct CriterionResult {
  std::string scene;
  std::string criterion;
  double measured;
  double threshold;
  bool pass;
};

inline double mean_abs_coherence(const CoherenceEstimate& est, std::size_t i, std::size_t j, double f_lo, double f_hi) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < est.num_bins(); ++k) {
    const double f = static_cast<double>(k) * est.sample_rate_hz / static_cast<double>(est.fft_length);
    if (f < f_lo || f > f_hi) continue;
    if (const auto g = est.at(i, j, k)) {
      sum += std::abs(*g);
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

// Generates each scene with `generator` settings (the base configuration plus
// the perturbations) and checks it against the model of the unperturbed scene.
inline std::vector<CriterionResult> run_validation_scene(const ValidationScene& scene, const RunConfig& base,
                                                         const std::vector<std::pair<std::string, std::string>>& perturb) {
  RunConfig reference = base;
  reference.channels = scene.channels;
  reference.spacing = scene.spacing;
  reference.speed = scene.speed;
  reference.doa = scene.doa;
  RunConfig generator = reference;
  for (const auto& [k, v] : perturb) set_config_value(generator, k, v);

  const auto ref_sim = to_simulation_config(reference);
  const auto gen_sim = to_simulation_config(generator);
  const auto signals = generate(gen_sim).signals;
  const auto est = estimate_coherence(signals, ref_sim.window, ref_sim.corcos.fft_length);

  std::vector<CriterionResult> results;
  for (std::size_t i = 0; i + 1 < scene.channels; ++i) {
    const double v = nmse(est, ref_sim.corcos, i, i + 1, base.band_limit).value;
    results.push_back({scene.name, "nMSE mic " + std::to_string(i + 1) + "-" + std::to_string(i + 2), v, kNmseThreshold,
                       v <= kNmseThreshold});
  }
  if (direction_cosines(scene.doa).cos_theta == 0.0) {
    double max_im = 0.0;
    const auto k_last = last_bin_within(base.band_limit, ref_sim.corcos.fft_length, ref_sim.corcos.sample_rate_hz);
    for (std::size_t k = 0; k <= k_last; ++k) {
      if (const auto g = est.at(0, 1, k)) max_im = std::max(max_im, std::abs(g->imag()));
    }
    results.push_back({scene.name, "max |Im coherence| mic 1-2", max_im, kCrosswindImagThreshold,
                       max_im <= kCrosswindImagThreshold});
  }
  for (std::size_t i = 0; i + 2 < scene.channels; ++i) {
    const double near = mean_abs_coherence(est, i, i + 1, 50.0, 500.0);
    const double far = mean_abs_coherence(est, i, i + 2, 50.0, 500.0);
    results.push_back({scene.name,
                       "mean |coherence| 50-500 Hz, mic " + std::to_string(i + 1) + "-" + std::to_string(i + 3) +
                           " below mic " + std::to_string(i + 1) + "-" + std::to_string(i + 2),
                       far, near, far < near});
  }
  return results;
}

inline int cmd_validate(const RunConfig& base, const std::vector<std::pair<std::string, std::string>>& perturb,
                        bool list_only, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    const auto scenes = validation_scenes();
    if (list_only) {
      out << "scene,channels,spacing_m,speed_mps,doa_rad,duration_s\n";
      for (const auto& s : scenes) {
        out << s.name << ',' << s.channels << ',' << s.spacing << ',' << s.speed << ',' << s.doa << ',' << base.duration
            << '\n';
      }
      return int{kOk};
    }
    bool all = true;
    for (const auto& scene : scenes) {
      for (const auto& r : run_validation_scene(scene, base, perturb)) {
        out << (r.pass ? "PASS " : "FAIL ") << r.scene << ": " << r.criterion << " = " << std::setprecision(6)
            << r.measured << " (limit " << r.threshold << ")\n";
        all = all && r.pass;
      }
    }
    return all ? int{kOk} : int{kValidationFailed};
  });
}

}  // namespace windnoise::app
