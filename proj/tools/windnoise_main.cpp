// windnoise: generate multichannel wind noise with Corcos coherence and
// validate generated signals against the model.

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "windnoise/app.hpp"
#include "windnoise/config.hpp"

namespace {

struct SceneFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::string> seed, duration, channels, spacing, speed, doa, output, report, band_limit;
  bool split = false;
  bool pcm16 = false;
  bool dump = false;
};

void add_common(CLI::App* cmd, SceneFlags& f) {
  cmd->add_option("--config", f.config_path, "key = value configuration file");
  cmd->add_option("--set", f.sets, "override any configuration key (key=value), repeatable");
  cmd->add_option("--seed", f.seed, "master random seed");
  cmd->add_option("--duration", f.duration, "signal duration [s]");
  cmd->add_option("--channels", f.channels, "number of microphones N");
  cmd->add_option("--spacing", f.spacing, "adjacent microphone spacing [m]");
  cmd->add_option("--speed", f.speed, "free-field wind speed [m/s]");
  cmd->add_option("--doa", f.doa, "wind direction [rad], or degrees with suffix, e.g. 90deg");
  cmd->add_option("--band-limit", f.band_limit, "analysis upper frequency [Hz]");
  cmd->add_flag("--dump-config", f.dump, "print the effective configuration and exit");
}

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw windnoise::ConfigError("override '" + s + "' is not of the form key=value");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

windnoise::RunConfig build_config(const SceneFlags& f) {
  windnoise::RunConfig rc;
  if (!f.config_path.empty()) rc = windnoise::load_config_file(f.config_path, rc);
  for (const auto& s : f.sets) {
    const auto [k, v] = split_assignment(s);
    windnoise::set_config_value(rc, k, v);
  }
  auto apply = [&rc](const char* key, const std::optional<std::string>& v) {
    if (v) windnoise::set_config_value(rc, key, *v);
  };
  apply("seed", f.seed);
  apply("duration", f.duration);
  apply("channels", f.channels);
  apply("spacing", f.spacing);
  apply("speed", f.speed);
  apply("doa", f.doa);
  apply("output", f.output);
  apply("report", f.report);
  apply("band_limit", f.band_limit);
  if (f.split) rc.split = true;
  if (f.pcm16) rc.output_format = "pcm16";
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multichannel wind-noise generator with Corcos spatial coherence"};
  app.require_subcommand(1);

  SceneFlags gen_flags, ana_flags, val_flags;
  auto* gen = app.add_subcommand("generate", "synthesize an N-channel wind-noise WAV");
  add_common(gen, gen_flags);
  gen->add_option("--output,-o", gen_flags.output, "output WAV path");
  gen->add_flag("--split", gen_flags.split, "write one mono WAV per microphone");
  gen->add_flag("--pcm16", gen_flags.pcm16, "16-bit PCM with TPDF dither instead of 32-bit float");

  std::string input;
  auto* ana = app.add_subcommand("analyze", "estimate coherence of a WAV and compare it with the model");
  add_common(ana, ana_flags);
  ana->add_option("input", input, "multichannel WAV to analyze")->required();
  ana->add_option("--report", ana_flags.report, "coherence report CSV path");

  bool list_only = false;
  std::vector<std::string> perturb;
  auto* val = app.add_subcommand("validate", "generate and analyze the reference scenes, PASS/FAIL per criterion");
  add_common(val, val_flags);
  val->add_flag("--list", list_only, "print the scene matrix without running");
  val->add_option("--perturb", perturb, "key=value applied to the generator only (mismatch injection), repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return windnoise::app::kConfigInvalid;
  }

  SceneFlags& flags = gen->parsed() ? gen_flags : ana->parsed() ? ana_flags : val_flags;
  windnoise::RunConfig rc;
  const int status = windnoise::app::run_guarded(std::cerr, [&] {
    rc = build_config(flags);
    return int{windnoise::app::kOk};
  });
  if (status != windnoise::app::kOk) return status;
  if (flags.dump) {
    std::cout << windnoise::dump_config(rc);
    return windnoise::app::kOk;
  }

  if (gen->parsed()) return windnoise::app::cmd_generate(rc, std::cout, std::cerr);
  if (ana->parsed()) return windnoise::app::cmd_analyze(input, rc, std::cout, std::cerr);

  std::vector<std::pair<std::string, std::string>> assignments;
  const int perr = windnoise::app::run_guarded(std::cerr, [&] {
    for (const auto& p : perturb) {
      auto kv = split_assignment(p);
      windnoise::RunConfig probe = rc;
      windnoise::set_config_value(probe, kv.first, kv.second);
      assignments.push_back(std::move(kv));
    }
    return int{windnoise::app::kOk};
  });
  if (perr != windnoise::app::kOk) return perr;
  return windnoise::app::cmd_validate(rc, assignments, list_only, std::cout, std::cerr);
}
