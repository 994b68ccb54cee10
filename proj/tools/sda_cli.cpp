// sda: command-line front end for the array/modem/channel simulator.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sda/beamforming.hpp"
#include "sda/channel.hpp"
#include "sda/comet.hpp"
#include "sda/control_server.hpp"
#include "sda/iq.hpp"
#include "sda/linkbudget.hpp"
#include "sda/ppdu.hpp"
#include "sda/receiver.hpp"
#include "sda/scenario.hpp"
#include "sda/serialization.hpp"
#include "sda/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sda;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitSim = 4;

volatile std::sig_atomic_t g_stop = 0;

std::string read_payload(const std::string& source) {
  if (source == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return read_text(source);
}

modem::Bits payload_bits(const std::string& source) {
  const std::string text = read_payload(source);
  return modem::bytes_to_bits(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string fmt(double v, int decimals = 2) { return format_fixed(v, decimals); }

void print_kv(const std::string& key, const std::string& value) { std::cout << key << ": " << value << "\n"; }

/// Writes to `explicit_path` when given, else a content-addressed name under `out_dir`.
fs::path emit(const std::string& explicit_path, const fs::path& out_dir, const std::string& kind, std::uint64_t seed,
              const std::string& content, const std::string& ext) {
  if (!explicit_path.empty()) {
    write_text(explicit_path, content);
    return explicit_path;
  }
  return write_artifact(out_dir, kind, seed, content, ext);
}

struct Common {
  std::string scenario_path;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string output;
  CLI::Option* seed_opt = nullptr;

  std::optional<Scenario> scenario() const {
    if (scenario_path.empty()) return std::nullopt;
    return load_scenario(scenario_path);
  }
  std::uint64_t effective_seed(const std::optional<Scenario>& s) const {
    if (seed_opt && seed_opt->count() > 0) return seed;
    return s ? s->seed : seed;
  }
};

void add_common(CLI::App* app, Common& c, bool scenario = true, bool output = true) {
  if (scenario) app->add_option("--scenario", c.scenario_path, "Scenario JSON file")->check(CLI::ExistingFile);
  c.seed_opt = app->add_option("--seed", c.seed, "Random seed (defaults to the scenario seed, else 1)");
  app->add_option("--out-dir", c.out_dir, "Directory for content-addressed artifacts")->capture_default_str();
  if (output) app->add_option("-o,--output", c.output, "Explicit output file instead of an artifact name");
}

// ---------------------------------------------------------------------------

struct PatternArgs {
  Common common;
  std::vector<int> beams;
  bool all_beams = false;
  std::string taper;
  std::string element = "isotropic";
  std::string reference;
  double start = -90.0, stop = 90.0, step = 0.1;
  bool dac_codes = false;
};

int run_pattern(const PatternArgs& a) {
  const auto sc = a.common.scenario();
  const Scenario s = sc.value_or(Scenario{});
  const std::uint64_t seed = a.common.effective_seed(sc);
  const beam::Taper taper = a.taper.empty() ? s.taper : beam::parse_taper(a.taper);
  const beam::Codebook cb = beam::build_codebook(s.geometry(), taper, s.dac_bits);

  std::vector<int> beams = a.beams;
  if (a.all_beams) {
    beams.clear();
    for (int k = 1; k <= cb.size(); ++k) beams.push_back(k);
  }
  if (beams.empty()) beams = sc ? s.pattern.beams : std::vector<int>{beam::kBroadsideBeamIndex};

  beam::PatternOptions opt;
  opt.element = sc && a.element == "isotropic" ? s.channel.element : beam::parse_element_model(a.element);
  opt.reference = sc ? s.pattern.reference : beam::PatternReference::absolute_dbi;
  if (a.reference == "normalized") opt.reference = beam::PatternReference::normalized;
  else if (a.reference == "absolute_dbi") opt.reference = beam::PatternReference::absolute_dbi;
  else if (!a.reference.empty()) throw Error(Errc::invalid_argument, "unknown reference '" + a.reference + "'");
  opt.use_dac_codes = a.dac_codes;
  const RVector grid = sc ? beam::uniform_grid(s.pattern.start_deg, s.pattern.stop_deg, s.pattern.step_deg)
                          : beam::uniform_grid(a.start, a.stop, a.step);

  std::vector<beam::Pattern> patterns;
  for (int b : beams) patterns.push_back(beam::compute_pattern(cb.at(b).awv, s.geometry(), grid, opt));

  json config{{"beams", beams},
              {"taper", beam::to_string(taper)},
              {"element", beam::to_string(opt.element)},
              {"reference", opt.reference == beam::PatternReference::normalized ? "normalized" : "absolute_dbi"},
              {"grid", {grid(0), grid(grid.size() - 1), grid.size()}},
              {"dac_codes", a.dac_codes}};
  if (sc) config["scenario"] = s.source;
  const std::string csv = patterns_csv(beams, patterns, ArtifactMeta{"pattern", seed, config});
  const fs::path path = emit(a.common.output, a.common.out_dir, "pattern", seed, csv, "csv");

  for (std::size_t i = 0; i < beams.size(); ++i) {
    const beam::PatternMetrics m = beam::pattern_metrics(patterns[i]);
    std::cout << "beam " << beams[i] << ": peak_angle_deg=" << fmt(m.peak_angle_deg)
              << " peak_gain_db=" << fmt(m.peak_gain_db) << " hpbw_deg=" << fmt(m.hpbw_deg);
    if (m.first_sidelobe_db) std::cout << " first_sidelobe_db=" << fmt(*m.first_sidelobe_db);
    if (m.peak_to_null_db) std::cout << " peak_to_null_db=" << fmt(*m.peak_to_null_db);
    std::cout << "\n";
  }
  print_kv("artifact", path.string());
  return 0;
}

// ---------------------------------------------------------------------------

struct CodebookArgs {
  Common common;
  std::string taper;
  int dac_bits = beam::kDefaultDacBits;
  CLI::Option* dac_opt = nullptr;
  std::string format = "csv";
};

int run_codebook(const CodebookArgs& a) {
  const auto sc = a.common.scenario();
  const Scenario s = sc.value_or(Scenario{});
  const std::uint64_t seed = a.common.effective_seed(sc);
  const beam::Taper taper = a.taper.empty() ? s.taper : beam::parse_taper(a.taper);
  const int bits = a.dac_opt->count() ? a.dac_bits : s.dac_bits;
  const beam::Codebook cb = beam::build_codebook(s.geometry(), taper, bits);
  json config{{"taper", beam::to_string(taper)}, {"dac_bits", bits}};
  if (sc) config["scenario"] = s.source;
  const ArtifactMeta meta{"codebook", seed, config};
  fs::path path;
  if (a.format == "json") {
    json doc = codebook_json(cb);
    doc["meta"] = meta.to_json();
    path = emit(a.common.output, a.common.out_dir, "codebook", seed, doc.dump(2) + "\n", "json");
  } else {
    path = emit(a.common.output, a.common.out_dir, "codebook", seed, codebook_csv(cb, meta), "csv");
  }
  print_kv("beams", std::to_string(cb.size()));
  print_kv("artifact", path.string());
  return 0;
}

// ---------------------------------------------------------------------------

struct LinkArgs {
  link::LinkBudgetParams p;
  std::string format = "text";
};

int run_linkbudget(const LinkArgs& a) {
  const link::LinkBudgetResult r = link::solve_range(a.p);
  const modem::PpduConfig ofdm;
  const double tsym = link::symbol_duration(ofdm.idft_size, ofdm.cp_len, ofdm.sample_rate_hz);
  const double bw = link::occupied_bandwidth(ofdm.sample_rate_hz, ofdm.n_active_tones, ofdm.n_dc_null, ofdm.idft_size);
  std::vector<std::pair<std::string, double>> rates;
  for (int m : {2, 4, 16, 64}) {
    link::RateParams rp;
    rp.modulation_order = m;
    rp.symbol_duration_s = tsym;
    rates.emplace_back(modem::to_string(modem::modulation_from_order(m)), link::data_rate(rp));
  }
  if (a.format == "json") {
    json doc = json::parse(link::render_json(a.p, r));
    doc["waveform"] = {{"symbol_duration_ns", std::round(tsym * 1e11) / 100.0}, {"signal_bandwidth_hz", bw}};
    for (const auto& [name, rate] : rates) doc["data_rate_mbps"][name] = std::round(rate / 1e4) / 100.0;
    doc["meta"] = ArtifactMeta{"linkbudget", 0, json::parse(link::render_json(a.p, r))["params"]}.to_json();
    std::cout << doc.dump(2) << "\n";
    return 0;
  }
  std::cout << link::render_text(a.p, r);
  print_kv("symbol_duration_ns", fmt(tsym * 1e9));
  print_kv("signal_bandwidth_hz", fmt(bw));
  for (const auto& [name, rate] : rates) print_kv("data_rate_" + name + "_mbps", fmt(rate / 1e6));
  return 0;
}

// ---------------------------------------------------------------------------

struct EncodeArgs {
  Common common;
  std::string payload;
  std::string modulation = "bpsk";
};

int run_ppdu_encode(const EncodeArgs& a) {
  modem::PpduConfig cfg;
  cfg.modulation = modem::parse_modulation(a.modulation);
  const modem::Bits bits = payload_bits(a.payload);
  const modem::Ppdu ppdu = modem::build_ppdu(bits, cfg);
  const std::string bytes = iqfile::encode(ppdu.iq);
  const std::uint64_t seed = a.common.seed;
  const fs::path path = emit(a.common.output, a.common.out_dir, "ppdu", seed, bytes, "sdaiq");
  json sidecar{{"meta", ArtifactMeta{"ppdu-encode", seed, {{"modulation", a.modulation}}}.to_json()},
               {"frame", frame_json(ppdu.frame)},
               {"samples", ppdu.iq.size()}};
  write_text(path.string() + ".json", sidecar.dump(2) + "\n");
  print_kv("payload_bits", std::to_string(bits.size()));
  print_kv("samples", std::to_string(ppdu.iq.size()));
  print_kv("payload_symbols", std::to_string(ppdu.frame.n_payload_symbols));
  print_kv("artifact", path.string());
  return 0;
}

struct DecodeArgs {
  std::string input;
  std::string output;
  std::string report;
};

int report_decode(const modem::DecodeReport& rep) {
  print_kv("status", modem::to_string(rep.status));
  if (rep.status == modem::DecodeStatus::sync_not_found) throw Error(Errc::not_found, "synchronization failed");
  print_kv("timing_offset_samples", std::to_string(rep.timing_offset_samples));
  print_kv("cfo_hz_estimate", fmt(rep.cfo_hz_estimate, 1));
  print_kv("snr_db", fmt(rep.snr_db));
  if (rep.status == modem::DecodeStatus::header_crc_fail) throw Error(Errc::protocol, "header CRC failed");
  if (rep.status == modem::DecodeStatus::truncated) throw Error(Errc::protocol, "frame truncated");
  print_kv("modulation", modem::to_string(rep.header->modulation));
  print_kv("payload_bits", std::to_string(rep.payload.size()));
  print_kv("codewords", std::to_string(rep.codewords_crc_ok) + "/" + std::to_string(rep.codewords_total));
  if (rep.evm_db) print_kv("evm_db", fmt(*rep.evm_db));
  for (const auto& w : rep.warnings) print_kv("warning", w);
  return 0;
}

int run_ppdu_decode(const DecodeArgs& a) {
  const IqBuffer iq = iqfile::read(a.input);
  const modem::DecodeReport rep = modem::demod_decode(iq, modem::PpduConfig{});
  if (!a.report.empty()) write_text(a.report, decode_report_json(rep).dump(2) + "\n");
  report_decode(rep);
  print_kv("payload recovered", rep.payload_ok() ? "true" : "false");
  if (!a.output.empty()) {
    const auto bytes = modem::bits_to_bytes(rep.payload);
    const std::string data(bytes.begin(), bytes.end());
    if (a.output == "-")
      std::cout.write(data.data(), static_cast<std::streamsize>(data.size()));
    else
      write_text(a.output, data);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct LoopbackArgs {
  Common common;
  std::string payload;
  std::string modulation = "bpsk";
  std::optional<double> snr_db;
  double cfo_hz = 0.0;
  int delay = 100;
  bool constellation = false;
};

int run_loopback(const LoopbackArgs& a) {
  modem::PpduConfig cfg;
  cfg.modulation = modem::parse_modulation(a.modulation);
  if (a.delay < 0) throw Error(Errc::invalid_argument, "delay must be non-negative");
  const modem::Bits bits = payload_bits(a.payload);
  const modem::Ppdu ppdu = modem::build_ppdu(bits, cfg);
  IqBuffer rx;
  rx.origin = Origin::rx;
  rx.sample_rate_hz = ppdu.iq.sample_rate_hz;
  rx.samples = CVector::Zero(ppdu.iq.size() + a.delay + cfg.symbol_len());
  rx.samples.segment(a.delay, ppdu.iq.size()) = ppdu.iq.samples;
  if (a.cfo_hz != 0.0) modem::correct_cfo(rx.samples, -a.cfo_hz, rx.sample_rate_hz);
  if (a.snr_db) {
    // Per-subcarrier SNR: active tones carry unit power through the unitary FFT.
    std::mt19937_64 rng(a.common.seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(db2pow(-*a.snr_db) / 2.0));
    for (auto& s : rx.samples) s += cplx(nd(rng), nd(rng));
  }
  const modem::DecodeReport rep = modem::demod_decode(rx, cfg);
  report_decode(rep);
  const bool recovered = rep.payload_ok() && rep.payload == bits;
  print_kv("payload recovered", recovered ? "true" : "false");
  if (a.constellation) {
    std::string csv = ArtifactMeta{"loopback",
                                   a.common.seed,
                                   {{"modulation", a.modulation},
                                    {"snr_db", a.snr_db ? json(*a.snr_db) : json(nullptr)},
                                    {"cfo_hz", a.cfo_hz}}}
                          .csv_comment() +
                      "i,q\n";
    for (const cplx& z : rep.equalized) csv += fmt(z.real(), 5) + "," + fmt(z.imag(), 5) + "\n";
    print_kv("artifact", emit(a.common.output, a.common.out_dir, "loopback", a.common.seed, csv, "csv").string());
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  Common common;
  int threads = 0;
};

int run_sweep_cmd(const SweepArgs& a) {
  const auto sc = a.common.scenario();
  if (!sc) throw Error(Errc::invalid_argument, "sweep needs --scenario");
  const std::uint64_t seed = a.common.effective_seed(sc);
  const sweep::SweepConfig cfg = make_sweep_config(*sc, seed, a.threads);
  const sweep::SweepResult res = sweep::run_sweep(cfg);
  const ArtifactMeta meta{"sweep", seed, {{"scenario", sc->source}, {"frames_per_position", cfg.frames_per_position}}};
  const fs::path csv = emit(a.common.output, a.common.out_dir, "sweep", seed, snr_matrix_csv(res.matrix, meta), "csv");
  const fs::path result = write_artifact(a.common.out_dir, "sweep", seed, sweep_result_json(res, meta).dump(2) + "\n", "json");
  print_kv("best_pair", std::to_string(res.best_pair.first) + " " + std::to_string(res.best_pair.second));
  print_kv("peak_snr_db", fmt(res.matrix.at(res.best_pair.first, res.best_pair.second)));
  print_kv("min_snr_db", fmt(res.matrix.values_db.minCoeff()));
  for (const auto& p : res.secondary_peaks)
    print_kv("secondary_peak", std::to_string(p.tx) + " " + std::to_string(p.rx) + " " + fmt(p.snr_db));
  print_kv("matrix", csv.string());
  print_kv("result", result.string());
  return 0;
}

// ---------------------------------------------------------------------------

struct CometArgs {
  Common common;
  std::optional<double> phase_step;
};

int run_comet(const CometArgs& a) {
  const auto sc = a.common.scenario();
  const Scenario s = sc.value_or(Scenario{});
  const std::uint64_t seed = a.common.effective_seed(sc);
  const double step = a.phase_step.value_or(s.comet.phase_step_deg);
  if (!(step > 0.0 && step <= 360.0)) throw Error(Errc::invalid_argument, "phase step must lie in (0, 360]");
  std::vector<double> phases;
  for (double p = 0.0; p < 360.0 - 1e-9; p += step) phases.push_back(p);
  const comet::ArrayModel model = make_comet_model(s, seed);
  const comet::CodeSet codes = comet::gen_codes(s.comet.n_elements);
  const auto rows = comet::sweep_phase_settings(model, phases, codes);
  json config{{"phase_step_deg", step}, {"code_length", codes.length()}, {"walsh_indices", codes.walsh_indices}};
  if (sc) config["scenario"] = s.source;
  const fs::path path =
      emit(a.common.output, a.common.out_dir, "comet", seed, gain_table_csv(rows, ArtifactMeta{"comet", seed, config}), "csv");
  double worst = 0.0;
  for (double p : phases) worst = std::max(worst, comet::gain_spread_db(rows, p));
  print_kv("elements", std::to_string(s.comet.n_elements));
  print_kv("code_length", std::to_string(codes.length()));
  print_kv("phase_settings", std::to_string(phases.size()));
  print_kv("max_element_spread_db", fmt(worst));
  print_kv("artifact", path.string());
  return 0;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  Common common;
  std::string bind;
  int threads = 1;
};

int run_serve(const ServeArgs& a) {
  const auto sc = a.common.scenario();
  Scenario s = sc.value_or(Scenario{});
  if (a.common.seed_opt->count()) s.seed = a.common.seed;
  const control::BindAddress addr = a.bind.empty() ? control::bind_from_env() : control::parse_bind(a.bind);
  control::ControlService service(std::move(s), a.common.out_dir, a.threads);
  control::TcpServer server(service);
  const std::uint16_t port = server.start(addr);
  std::cout << "listening on " << addr.host << ":" << port << std::endl;
  std::signal(SIGINT, [](int) { g_stop = 1; });
  std::signal(SIGTERM, [](int) { g_stop = 1; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Software-defined phased-array simulator"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  PatternArgs pattern;
  auto* p = app.add_subcommand("pattern", "Far-field pattern of codebook beams (CSV)");
  add_common(p, pattern.common);
  p->add_option("--beam", pattern.beams, "Beam index 1..21 (repeatable)");
  p->add_flag("--all-beams", pattern.all_beams, "All 21 codebook beams");
  p->add_option("--taper", pattern.taper, "uniform | hamming");
  p->add_option("--element", pattern.element, "isotropic | cosine")->capture_default_str();
  p->add_option("--reference", pattern.reference, "absolute_dbi | normalized");
  p->add_option("--start", pattern.start, "Grid start (deg)")->capture_default_str();
  p->add_option("--stop", pattern.stop, "Grid stop (deg)")->capture_default_str();
  p->add_option("--step", pattern.step, "Grid step (deg)")->capture_default_str();
  p->add_flag("--dac-codes", pattern.dac_codes, "Use quantized I/Q codes instead of ideal weights");

  CodebookArgs codebook;
  auto* c = app.add_subcommand("codebook", "Export the 21-beam codebook");
  add_common(c, codebook.common);
  c->add_option("--taper", codebook.taper, "uniform | hamming");
  codebook.dac_opt = c->add_option("--dac-bits", codebook.dac_bits, "I/Q DAC resolution")->check(CLI::Range(2, 12));
  c->add_option("--format", codebook.format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  LinkArgs link_args;
  auto* l = app.add_subcommand("linkbudget", "Solve the link budget for range; report data rates");
  l->add_option("--eirp", link_args.p.eirp_dbm, "EIRP (dBm)")->capture_default_str();
  l->add_option("--rx-gain", link_args.p.rx_gain_dbi, "RX antenna gain (dBi)")->capture_default_str();
  l->add_option("--nf", link_args.p.noise_figure_db, "Noise figure (dB)")->capture_default_str();
  l->add_option("--bandwidth", link_args.p.bandwidth_hz, "Noise bandwidth (Hz)")->capture_default_str();
  l->add_option("--snr-req", link_args.p.required_snr_db, "Required SNR (dB)")->capture_default_str();
  l->add_option("--margin", link_args.p.link_margin_db, "Link margin (dB)")->capture_default_str();
  l->add_option("--atm-loss", link_args.p.atmospheric_loss_db, "Atmospheric loss (dB)")->capture_default_str();
  l->add_option("--freq", link_args.p.carrier_frequency_hz, "Carrier (Hz)")->capture_default_str();
  l->add_option("--format", link_args.format, "text | json")->check(CLI::IsMember({"text", "json"}))->capture_default_str();

  EncodeArgs encode;
  auto* e = app.add_subcommand("ppdu-encode", "Build a PPDU and write it as an SDAIQ file");
  add_common(e, encode.common, false);
  e->add_option("--payload", encode.payload, "Payload file ('-' for stdin)")->required();
  e->add_option("--mod", encode.modulation, "bpsk | 4qam | 16qam | 64qam")->capture_default_str();

  DecodeArgs decode;
  auto* d = app.add_subcommand("ppdu-decode", "Decode an SDAIQ file");
  d->add_option("--input", decode.input, "SDAIQ file")->required()->check(CLI::ExistingFile);
  d->add_option("-o,--output", decode.output, "Write recovered payload bytes ('-' for stdout)");
  d->add_option("--report", decode.report, "Write the decode report as JSON");

  LoopbackArgs loop;
  auto* lb = app.add_subcommand("loopback", "Encode, pass through AWGN/CFO, decode");
  add_common(lb, loop.common, false);
  lb->add_option("--payload", loop.payload, "Payload file ('-' for stdin)")->required();
  lb->add_option("--mod", loop.modulation, "bpsk | 4qam | 16qam | 64qam")->capture_default_str();
  lb->add_option("--snr-db", loop.snr_db, "Per-subcarrier SNR (omit for noiseless)");
  lb->add_option("--cfo-hz", loop.cfo_hz, "Carrier frequency offset")->capture_default_str();
  lb->add_option("--delay", loop.delay, "Leading samples before the frame")->capture_default_str();
  lb->add_flag("--constellation", loop.constellation, "Write equalized symbols as a CSV artifact");

  SweepArgs sweep_args;
  auto* sw = app.add_subcommand("sweep", "Exhaustive 21x21 beam sweep over a scenario");
  add_common(sw, sweep_args.common);
  sw->add_option("--threads", sweep_args.threads, "Worker threads (0 = all cores)")->capture_default_str();

  CometArgs comet_args;
  auto* cm = app.add_subcommand("comet", "Code-multiplexed element extraction over phase settings");
  add_common(cm, comet_args.common);
  cm->add_option("--phase-step", comet_args.phase_step, "Commanded phase step (deg)");

  ServeArgs serve;
  auto* sv = app.add_subcommand("serve", "Run the TCP control service");
  add_common(sv, serve.common, true, false);
  sv->add_option("--bind", serve.bind, "host:port (default $SDA_BIND or 127.0.0.1:5225)");
  sv->add_option("--threads", serve.threads, "Sweep worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << "error: usage: " << ex.what() << "\n";
    return kExitUsage;
  }

  try {
    if (p->parsed()) return run_pattern(pattern);
    if (c->parsed()) return run_codebook(codebook);
    if (l->parsed()) return run_linkbudget(link_args);
    if (e->parsed()) return run_ppdu_encode(encode);
    if (d->parsed()) return run_ppdu_decode(decode);
    if (lb->parsed()) return run_loopback(loop);
    if (sw->parsed()) return run_sweep_cmd(sweep_args);
    if (cm->parsed()) return run_comet(comet_args);
    if (sv->parsed()) return run_serve(serve);
  } catch (const Error& ex) {
    std::cout.flush();
    std::cerr << "error: " << to_string(ex.code()) << ": " << ex.what() << "\n";
    return ex.code() == Errc::io ? kExitIo : kExitSim;
  } catch (const std::exception& ex) {
    std::cout.flush();
    std::cerr << "error: internal: " << ex.what() << "\n";
    return kExitSim;
  }
  return kExitUsage;
}
