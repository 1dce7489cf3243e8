#pragma once

// Flat `key = value` run configuration (one entry per line, `#` comments).
//
// Units: spacing in meters, speed in m/s, doa in radians unless suffixed with
// "deg" (e.g. "90deg"), durations in seconds, lengths in samples.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "windnoise/allpole.hpp"
#include "windnoise/engine.hpp"
#include "windnoise/error.hpp"
#include "windnoise/excitation.hpp"
#include "windnoise/wav.hpp"

namespace windnoise {

struct RunConfig {
  // scene
  std::size_t channels = 2;
  double spacing = 0.004;
  double speed = 1.8;
  double doa = std::numbers::pi / 2.0;
  double convective_ratio = 0.8;
  double alpha_longitudinal = 0.125;
  double alpha_lateral = 0.7;
  // grid
  double sample_rate = 16000.0;
  std::size_t fft_length = 2048;
  std::size_t window_length = 2048;
  std::size_t hop_length = 512;
  double duration = 600.0;
  std::uint64_t seed = 1;
  // source model
  std::vector<double> markov_gains{0.0, 0.3, 1.0};
  std::vector<double> markov_transitions{0.98, 0.01, 0.01, 0.01, 0.98, 0.01, 0.01, 0.01, 0.98};
  std::size_t markov_initial_state = 1;
  std::size_t markov_frame_length = 160;
  double weibull_shape = 1.5;
  double weibull_scale = 1.0;
  std::size_t weibull_frame_length = 160;
  std::size_t longterm_smoothing = 8001;
  std::size_t shortterm_smoothing = 481;
  double excitation_mix = 0.5;
  std::string codebook_dir;
  std::size_t codebook_segment_length = 160;
  std::vector<double> ar_coefficients;  // empty: fit to the power-law target below
  std::size_t ar_order = kDefaultArOrder;
  double ar_knee_hz = 400.0;
  double ar_slope_db_per_octave = 24.0;
  // output / analysis
  std::string output = "windnoise.wav";
  std::string output_format = "float32";
  bool split = false;
  std::string report = "coherence.csv";
  double band_limit = 1000.0;
};

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError("invalid number '" + t + "' for key '" + std::string(key) + "'");
  }
  return v;
}

inline std::uint64_t parse_uint(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError("invalid integer '" + t + "' for key '" + std::string(key) + "'");
  }
  return v;
}

inline double parse_angle(std::string_view key, std::string_view text) {
  std::string t = trim(text);
  double factor = 1.0;
  if (t.size() > 3 && t.ends_with("deg")) {
    t.resize(t.size() - 3);
    factor = std::numbers::pi / 180.0;
  } else if (t.size() > 3 && t.ends_with("rad")) {
    t.resize(t.size() - 3);
  }
  return parse_double(key, t) * factor;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("invalid boolean '" + t + "' for key '" + std::string(key) + "'");
}

inline std::vector<double> parse_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  const std::string t = trim(text);
  if (t.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = t.find(',', start);
    out.push_back(parse_double(key, std::string_view(t).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s;
}

struct KeyDef {
  std::string_view name;
  std::string_view help;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
KeyDef real_key(std::string_view name, std::string_view help, T RunConfig::*field) {
  return {name, help, [name, field](RunConfig& c, std::string_view v) { c.*field = parse_double(name, v); },
          [field](const RunConfig& c) { return format_double(c.*field); }};
}

inline KeyDef size_key(std::string_view name, std::string_view help, std::size_t RunConfig::*field) {
  return {name, help, [name, field](RunConfig& c, std::string_view v) { c.*field = parse_uint(name, v); },
          [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

inline KeyDef list_key(std::string_view name, std::string_view help, std::vector<double> RunConfig::*field) {
  return {name, help, [name, field](RunConfig& c, std::string_view v) { c.*field = parse_list(name, v); },
          [field](const RunConfig& c) { return format_list(c.*field); }};
}

inline KeyDef string_key(std::string_view name, std::string_view help, std::string RunConfig::*field) {
  return {name, help, [field](RunConfig& c, std::string_view v) { c.*field = trim(v); },
          [field](const RunConfig& c) { return c.*field; }};
}

inline const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table = {
      size_key("channels", "number of microphones N of the uniform linear array", &RunConfig::channels),
      real_key("spacing", "adjacent microphone spacing d [m]", &RunConfig::spacing),
      real_key("speed", "free-field wind speed U [m/s]", &RunConfig::speed),
      {"doa", "wind direction relative to the array axis [rad, or suffix 'deg']",
       [](RunConfig& c, std::string_view v) { c.doa = parse_angle("doa", v); },
       [](const RunConfig& c) { return format_double(c.doa); }},
      real_key("convective_ratio", "convective speed as a fraction of U", &RunConfig::convective_ratio),
      real_key("alpha_longitudinal", "longitudinal coherence decay rate", &RunConfig::alpha_longitudinal),
      real_key("alpha_lateral", "lateral coherence decay rate", &RunConfig::alpha_lateral),
      real_key("sample_rate", "sampling frequency [Hz]", &RunConfig::sample_rate),
      size_key("fft_length", "DFT length K of the mixing/analysis STFT [samples]", &RunConfig::fft_length),
      size_key("window_length", "Hann window length [samples]", &RunConfig::window_length),
      size_key("hop_length", "STFT hop [samples]", &RunConfig::hop_length),
      real_key("duration", "signal duration [s]", &RunConfig::duration),
      {"seed", "master random seed",
       [](RunConfig& c, std::string_view v) { c.seed = parse_uint("seed", v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      list_key("markov_gains", "long-term gains for no/low/high wind", &RunConfig::markov_gains),
      list_key("markov_transitions", "3x3 row-stochastic transition matrix, row-major", &RunConfig::markov_transitions),
      size_key("markov_initial_state", "initial Markov state (0 no wind, 1 low, 2 high)", &RunConfig::markov_initial_state),
      size_key("markov_frame_length", "long-term gain frame length [samples]", &RunConfig::markov_frame_length),
      real_key("weibull_shape", "Weibull shape of the frame energy", &RunConfig::weibull_shape),
      real_key("weibull_scale", "Weibull scale of the frame energy", &RunConfig::weibull_scale),
      size_key("weibull_frame_length", "short-term gain frame length [samples]", &RunConfig::weibull_frame_length),
      size_key("longterm_smoothing", "long-term Hann smoothing length [samples, odd]", &RunConfig::longterm_smoothing),
      size_key("shortterm_smoothing", "short-term Hann smoothing length [samples, odd]", &RunConfig::shortterm_smoothing),
      real_key("excitation_mix", "weight of the codebook part of the excitation, in [0, 1]", &RunConfig::excitation_mix),
      string_key("codebook_dir", "directory of mono WAV codebook entries (empty: built-in)", &RunConfig::codebook_dir),
      size_key("codebook_segment_length", "samples per codebook draw", &RunConfig::codebook_segment_length),
      list_key("ar_coefficients", "AR coefficients a1..ap of A(z) (empty: fit to the target below)",
               &RunConfig::ar_coefficients),
      size_key("ar_order", "order of the fitted AR model", &RunConfig::ar_order),
      real_key("ar_knee_hz", "flat part of the AR target spectrum ends here [Hz]", &RunConfig::ar_knee_hz),
      real_key("ar_slope_db_per_octave", "AR target roll-off above the knee [dB/octave]",
               &RunConfig::ar_slope_db_per_octave),
      string_key("output", "output WAV path", &RunConfig::output),
      {"output_format", "float32 or pcm16",
       [](RunConfig& c, std::string_view v) {
         const auto t = trim(v);
         if (t != "float32" && t != "pcm16") throw ConfigError("invalid value '" + t + "' for key 'output_format'");
         c.output_format = t;
       },
       [](const RunConfig& c) { return c.output_format; }},
      {"split", "write one mono WAV per microphone",
       [](RunConfig& c, std::string_view v) { c.split = parse_bool("split", v); },
       [](const RunConfig& c) { return std::string(c.split ? "true" : "false"); }},
      string_key("report", "coherence report CSV path", &RunConfig::report),
      real_key("band_limit", "upper frequency of the coherence analysis [Hz]", &RunConfig::band_limit),
  };
  return table;
}

}  // namespace config_detail

inline void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& k : config_detail::key_table()) {
    if (k.name == key) {
      k.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

// Applies "key = value" lines on top of `config`.
inline void parse_config_text(RunConfig& config, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto body = config_detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    set_config_value(config, config_detail::trim(std::string_view(body).substr(0, eq)),
                     std::string_view(body).substr(eq + 1));
  }
}

inline RunConfig load_config_file(const std::string& path, RunConfig config = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  parse_config_text(config, ss.str());
  return config;
}

// Every key with its current value; feeding the text back reproduces `config`.
inline std::string dump_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : config_detail::key_table()) {
    out += "# ";
    out += k.help;
    out += "\n";
    out += k.name;
    out += " = ";
    out += k.get(config);
    out += "\n";
  }
  return out;
}

inline std::vector<std::string_view> config_keys() {
  std::vector<std::string_view> keys;
  for (const auto& k : config_detail::key_table()) keys.push_back(k.name);
  return keys;
}

inline ExcitationCodebook load_codebook_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("codebook directory '" + dir + "' not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("codebook directory '" + dir + "' has no .wav files");
  ExcitationCodebook cb;
  for (const auto& f : files) {
    auto buf = read_wav(f.string());
    if (buf.num_channels() != 1) throw ConfigError("codebook entry '" + f.string() + "' is not mono");
    auto entry = std::move(buf.channels.front());
    double ss = 0.0;
    for (double v : entry) ss += v * v;
    if (entry.empty() || ss <= 0.0) throw ConfigError("codebook entry '" + f.string() + "' is silent");
    normalize_rms(entry);
    cb.entries.push_back(std::move(entry));
  }
  return cb;
}

// Validates physical values (naming the offending key) and builds the
// library-level configuration.
inline SimulationConfig to_simulation_config(const RunConfig& rc) {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(std::string("key '") + key + "': " + what);
  };
  require(rc.channels >= 1, "channels", "must be at least 1");
  require(rc.spacing > 0.0, "spacing", "must be positive");
  require(rc.speed > 0.0, "speed", "must be positive");
  require(rc.doa >= 0.0 && rc.doa < 2.0 * std::numbers::pi, "doa", "must lie in [0, 2 pi)");
  require(rc.convective_ratio > 0.0, "convective_ratio", "must be positive");
  require(rc.alpha_longitudinal > 0.0, "alpha_longitudinal", "must be positive");
  require(rc.alpha_lateral > 0.0, "alpha_lateral", "must be positive");
  require(rc.sample_rate > 0.0, "sample_rate", "must be positive");
  require(rc.fft_length >= 2 && rc.fft_length % 2 == 0, "fft_length", "must be even and at least 2");
  require(rc.window_length >= 2 && rc.window_length <= rc.fft_length, "window_length", "must lie in [2, fft_length]");
  require(rc.hop_length >= 1 && rc.window_length % rc.hop_length == 0, "hop_length", "must divide window_length");
  require(rc.duration > 0.0, "duration", "must be positive");
  require(rc.duration * rc.sample_rate >= 2.0 * static_cast<double>(rc.fft_length), "duration",
          "must cover at least two FFT lengths");
  require(rc.markov_gains.size() == kNumWindStates, "markov_gains", "needs exactly 3 values");
  require(rc.markov_transitions.size() == kNumWindStates * kNumWindStates, "markov_transitions", "needs exactly 9 values");
  require(rc.excitation_mix >= 0.0 && rc.excitation_mix <= 1.0, "excitation_mix", "must lie in [0, 1]");
  require(rc.band_limit > 0.0, "band_limit", "must be positive");

  SimulationConfig sc;
  sc.corcos.num_channels = rc.channels;
  sc.corcos.mic_spacing_m = rc.spacing;
  sc.corcos.freefield_speed_mps = rc.speed;
  sc.corcos.doa_rad = rc.doa;
  sc.corcos.convective_ratio = rc.convective_ratio;
  sc.corcos.alpha_longitudinal = rc.alpha_longitudinal;
  sc.corcos.alpha_lateral = rc.alpha_lateral;
  sc.corcos.sample_rate_hz = rc.sample_rate;
  sc.corcos.fft_length = rc.fft_length;
  sc.window = {rc.window_length, rc.hop_length, WindowKind::hann};
  sc.duration_s = rc.duration;
  sc.master_seed = rc.seed;

  auto& mk = sc.gain_model.markov;
  for (std::size_t s = 0; s < kNumWindStates; ++s) {
    mk.state_gains[s] = rc.markov_gains[s];
    for (std::size_t t = 0; t < kNumWindStates; ++t) mk.transition_matrix[s][t] = rc.markov_transitions[s * kNumWindStates + t];
  }
  mk.initial_state = rc.markov_initial_state;
  mk.frame_len_samples = rc.markov_frame_length;
  sc.gain_model.weibull = {rc.weibull_shape, rc.weibull_scale, rc.weibull_frame_length};
  sc.gain_model.longterm_smooth_len = rc.longterm_smoothing;
  sc.gain_model.shortterm_smooth_len = rc.shortterm_smoothing;

  sc.codebook = rc.codebook_dir.empty() ? default_codebook() : load_codebook_dir(rc.codebook_dir);
  sc.codebook.mix_weight = rc.excitation_mix;
  sc.codebook.segment_len = rc.codebook_segment_length;

  if (rc.ar_coefficients.empty()) {
    require(rc.ar_order >= 1, "ar_order", "must be at least 1");
    require(rc.ar_knee_hz > 0.0 && rc.ar_knee_hz < rc.sample_rate / 2.0, "ar_knee_hz", "must lie in (0, Fs/2)");
    require(rc.ar_slope_db_per_octave >= 0.0, "ar_slope_db_per_octave", "must be nonnegative");
    sc.ar_coeffs = fit_ar_to_psd(PowerLawTarget{rc.ar_knee_hz, rc.ar_slope_db_per_octave}, rc.ar_order, rc.sample_rate)
                       .coefficients;
  } else {
    require(is_stable_allpole(rc.ar_coefficients), "ar_coefficients", "filter 1/A(z) is unstable");
    sc.ar_coeffs = rc.ar_coefficients;
  }
  sc.validate();
  return sc;
}

}  // namespace windnoise
