#include "pmmhf/experiment.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include "pmmhf/diagnostics.hpp"
#include "pmmhf/error.hpp"
#include "pmmhf/io.hpp"
#include "pmmhf/numeric.hpp"
#include "pmmhf/parallel.hpp"

namespace pmmhf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDataSalt = 0x64617461ULL;
constexpr std::uint64_t kCalibrationSalt = 0x63616c6962ULL;
constexpr std::uint64_t kChainSalt = 0x636861696e73ULL;

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json strip_timing(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!is_timing_key(it.key())) out[it.key()] = strip_timing(it.value());
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(strip_timing(v));
    return out;
  }
  return j;
}

std::string strip_timing_columns(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) return csv;
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  std::vector<bool> keep(header.size());
  bool any = false;
  for (std::size_t i = 0; i < header.size(); ++i) {
    keep[i] = !is_timing_key(header[i]);
    any = any || !keep[i];
  }
  if (!any) return csv;
  std::string out;
  auto emit = [&](const std::string& row) {
    std::istringstream rs(row);
    std::string cell;
    std::size_t i = 0;
    bool first = true;
    while (std::getline(rs, cell, ',')) {
      if (i < keep.size() && keep[i]) {
        if (!first) out += ',';
        out += cell;
        first = false;
      }
      ++i;
    }
    out += '\n';
  };
  emit(line);
  while (std::getline(in, line)) emit(line);
  return out;
}

std::string chain_csv(const Chain& chain) {
  std::ostringstream ss;
  write_chain_csv(ss, chain);
  return ss.str();
}

std::string timing_csv(const std::vector<double>& seconds) {
  std::ostringstream ss;
  write_timing_csv(ss, seconds);
  return ss.str();
}

std::string density_csv(const PredictiveDensity& pd) {
  std::ostringstream ss;
  write_density_csv(ss, pd);
  return ss.str();
}

json diagnostics_json(const Diagnostics& d, const std::string& label) {
  json params = json::object();
  for (std::size_t k = 0; k < d.names.size(); ++k)
    params[d.names[k]] = {{"mean", nullable(d.posterior_mean[k])},
                          {"sd", nullable(d.posterior_sd[k])},
                          {"inefficiency", nullable(d.inefficiency[k])}};
  return {{"filter", label},
          {"n_opt", d.n_opt},
          {"alct", d.alct},
          {"acceptance_rate", d.acceptance_rate},
          {"parameters", params}};
}

// label, N_opt, ALCT, IF per parameter, acceptance
std::string diagnostics_table(const std::vector<Diagnostics>& rows,
                              const std::vector<std::string>& labels) {
  std::ostringstream ss;
  ss << "filter,n_opt,alct";
  if (!rows.empty())
    for (const auto& n : rows.front().names) ss << ",if_" << n;
  ss << ",acceptance_rate\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ss << labels[i] << ',' << rows[i].n_opt << ',' << format_double(rows[i].alct);
    for (double v : rows[i].inefficiency) ss << ',' << format_double(v);
    ss << ',' << format_double(rows[i].acceptance_rate) << '\n';
  }
  return ss.str();
}

std::vector<double> theta_start(const ExperimentConfig& c, const Prior& prior,
                                std::span<const double> y) {
  if (c.pmmh.theta0) return *c.pmmh.theta0;
  if (c.params) return theta_from_model(Model(*c.params));
  return initial_theta(c.family, prior, y);
}

Model calibration_model(const ExperimentConfig& c, const Prior& prior,
                        std::span<const double> y) {
  const std::vector<double> theta = theta_start(c, prior, y);
  auto m = model_from_theta(c.family, theta);
  if (!m) throw ConfigError("the calibration point lies outside the model domain");
  return *m;
}

void run_simulate(const ExperimentConfig& c, ArtifactWriter& w) {
  if (c.data.source != DataConfig::Source::Simulate)
    throw ConfigError("simulate needs data.source = 'simulate'");
  const std::uint64_t seed = c.data.seed.value_or(derive_seed(c.seed, 0, kDataSalt));
  ReturnsSeries series;
  std::ostringstream states;
  json summary = {{"length", c.data.length}, {"dgp", c.data.dgp}, {"data_seed", seed}};
  if (c.data.dgp == "svij") {
    const SvijPath path = simulate_svij_path(c.data.svij, c.data.length, seed);
    series.returns = path.y;
    states << "t,x,price_jump,price_jump_size,vol_jump,vol_jump_size\n";
    for (std::size_t t = 0; t < path.x.size(); ++t) {
      states << t << ',' << format_double(path.x[t]);
      if (t == 0) {
        states << ",,,,\n";
      } else {
        states << ',' << (path.price_jump[t - 1] ? 1 : 0) << ','
               << format_double(path.price_jump_size[t - 1]) << ','
               << (path.vol_jump[t - 1] ? 1 : 0) << ','
               << format_double(path.vol_jump_size[t - 1]) << '\n';
      }
    }
    summary["truncations"] = path.truncations;
  } else {
    const Model model = c.model();
    const SimulatedSeries s = simulate(model, c.data.length, seed);
    series.returns = s.y;
    states << "t,x\n";
    for (std::size_t t = 0; t < s.x.size(); ++t) states << t << ',' << format_double(s.x[t]) << '\n';
    summary["family"] = std::string(to_string(c.family));
    summary["snr"] = model.snr();
  }
  std::ostringstream ys;
  write_returns(ys, series);
  w.write("series.csv", ys.str());
  w.write("states.csv", states.str());
  w.write_json("simulation.json", summary);
}

void run_calibrate(const ExperimentConfig& c, std::span<const double> y, ArtifactWriter& w) {
  if (c.filters.empty()) throw ConfigError("no filters configured");
  const Prior prior = c.prior();
  const Model model = calibration_model(c, prior, y);
  std::vector<NoptCalibration> results(c.filters.size());
  parallel_for(c.filters.size(), c.jobs, [&](std::size_t i) {
    const FilterConfig f = c.filters[i].with_particles(c.calibration.n_s);
    results[i] = calibrate_nopt(f, model, y, c.calibration.n_s, c.calibration.replications,
                                derive_seed(c.seed, i, kCalibrationSalt));
    spdlog::info("{}: N_opt = {} (variance {:.4f})", f.label(), results[i].n_opt,
                 results[i].loglik_variance);
  });
  json rows = json::array();
  std::ostringstream csv;
  csv << "filter,n_opt,loglik_variance,replications,excluded,mean_seconds\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const std::string label = c.filters[i].with_particles(c.calibration.n_s).label();
    rows.push_back({{"filter", label},
                    {"n_opt", r.n_opt},
                    {"loglik_variance", r.loglik_variance},
                    {"replications", r.replications},
                    {"excluded", r.excluded},
                    {"mean_seconds", r.mean_seconds}});
    csv << label << ',' << r.n_opt << ',' << format_double(r.loglik_variance) << ','
        << r.replications << ',' << r.excluded << ',' << format_double(r.mean_seconds) << '\n';
  }
  w.write_json("calibration.json", {{"n_s", c.calibration.n_s},
                                    {"replications", c.calibration.replications},
                                    {"snr", model.snr()},
                                    {"filters", rows}});
  w.write("calibration.csv", csv.str());
}

void run_pmmh_command(const ExperimentConfig& c, std::span<const double> y, ArtifactWriter& w) {
  if (c.filters.empty()) throw ConfigError("no filters configured");
  const Prior prior = c.prior();
  const std::vector<double> theta0 = theta_start(c, prior, y);
  if (!(log_prior(prior, theta0) > kNegInf))
    throw ConfigError("the starting point lies outside the prior support");

  std::vector<Chain> chains(c.filters.size());
  std::vector<std::size_t> n_used(c.filters.size());
  parallel_for(c.filters.size(), c.jobs, [&](std::size_t i) {
    const FilterSpec& spec = c.filters[i];
    std::size_t n = 0;
    if (spec.particles) {
      n = *spec.particles;
    } else {
      const Model model = calibration_model(c, prior, y);
      n = calibrate_nopt(spec.with_particles(c.calibration.n_s), model, y, c.calibration.n_s,
                         c.calibration.replications, derive_seed(c.seed, i, kCalibrationSalt))
              .n_opt;
    }
    n_used[i] = n;
    MhSettings ms;
    ms.iterations = c.pmmh.iterations;
    ms.burn_in = c.pmmh.burn_in;
    ms.seed = derive_seed(c.seed, i, kChainSalt);
    ms.proposal = c.pmmh.proposal;
    chains[i] = run_pmmh(spec.with_particles(n), c.family, prior, y, theta0, ms);
    spdlog::info("{}: N = {}, acceptance {:.3f}", chains[i].filter_label, n,
                 chains[i].acceptance_rate());
  });

  json index = json::array();
  json diag = json::array();
  std::vector<Diagnostics> rows;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const Chain& ch = chains[i];
    const std::string slug = file_slug(ch.filter_label);
    w.write("chain_" + slug + ".csv", chain_csv(ch));
    w.write("chain_" + slug + "_timing.csv", timing_csv(ch.likelihood_seconds));
    index.push_back({{"filter", ch.filter_label},
                     {"particles", n_used[i]},
                     {"chain", "chain_" + slug + ".csv"},
                     {"timing", "chain_" + slug + "_timing.csv"}});
    rows.push_back(diagnose(ch));
    labels.push_back(ch.filter_label);
    diag.push_back(diagnostics_json(rows.back(), ch.filter_label));
  }
  w.write_json("chains.json", {{"family", std::string(to_string(c.family))}, {"chains", index}});
  w.write_json("diagnostics.json", {{"family", std::string(to_string(c.family))},
                                    {"iterations", c.pmmh.iterations},
                                    {"burn_in", c.pmmh.burn_in},
                                    {"filters", diag}});
  w.write("table.csv", diagnostics_table(rows, labels));
}

json forecast_report_json(const ForecastReport& r) {
  json filters = json::object();
  for (const auto& f : r.filters)
    filters[f.label] = {{"ALS", nullable(f.als)},
                        {"ADLS", nullable(f.adls)},
                        {"excluded", f.excluded},
                        {"scores", f.scores}};
  return {{"baseline", r.baseline},
          {"in_sample", r.in_sample},
          {"horizon", r.realized_z.size()},
          {"realized_z", r.realized_z},
          {"filters", filters}};
}

std::string forecast_table(const json& report) {
  std::ostringstream ss;
  ss << "filter,ALS,ADLS\n";
  for (auto it = report.at("filters").begin(); it != report.at("filters").end(); ++it) {
    auto num = [](const json& v) { return v.is_number() ? format_double(v.get<double>()) : "nan"; };
    ss << it.key() << ',' << num(it.value().at("ALS")) << ',' << num(it.value().at("ADLS")) << '\n';
  }
  return ss.str();
}

void run_forecast_command(const ExperimentConfig& c, std::span<const double> y,
                          ArtifactWriter& w) {
  if (c.filters.empty()) throw ConfigError("no filters configured");
  std::vector<FilterConfig> filters;
  for (const auto& f : c.filters) filters.push_back(f.with_particles(f.particles.value_or(c.forecast.particles)));
  ForecastSettings s;
  s.horizon = c.forecast.horizon;
  s.refresh_every = c.forecast.refresh_every;
  s.mh_iterations = c.forecast.mh_iterations;
  s.burn_in = c.forecast.burn_in;
  s.thin = c.forecast.thin;
  s.grid = c.forecast.grid;
  s.proposal = c.pmmh.proposal;
  s.seed = c.seed;
  s.jobs = c.jobs;
  const ForecastReport r = rolling_forecast(y, c.family, c.prior(), filters, s);

  const json report = forecast_report_json(r);
  w.write_json("forecast_report.json", report);
  w.write("forecast_table.csv", forecast_table(report));

  std::ostringstream scores;
  scores << "period,realized_z";
  for (const auto& f : r.filters) scores << ',' << f.label;
  scores << '\n';
  for (std::size_t k = 0; k < r.realized_z.size(); ++k) {
    scores << k + 1 << ',' << format_double(r.realized_z[k]);
    for (const auto& f : r.filters) scores << ',' << format_double(f.scores[k]);
    scores << '\n';
  }
  w.write("forecast_scores.csv", scores.str());

  // Every filter shares the period grid, so densities line up column-wise.
  std::ostringstream dens;
  dens << "period,z";
  for (const auto& f : r.filters) dens << ',' << f.label;
  dens << '\n';
  for (std::size_t k = 0; k < r.realized_z.size(); ++k) {
    const auto& grid = r.filters.front().densities[k].grid;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      dens << k + 1 << ',' << format_double(grid[g]);
      for (const auto& f : r.filters) dens << ',' << format_double(f.densities[k].density[g]);
      dens << '\n';
    }
  }
  w.write("densities.csv", dens.str());

  for (const auto& f : r.filters) {
    const std::string slug = file_slug(f.label);
    w.write("density_" + slug + "_first.csv", density_csv(f.densities.front()));
    w.write("density_" + slug + "_last.csv", density_csv(f.densities.back()));
    for (std::size_t i = 0; i < f.chains.size(); ++i) {
      const std::string base = "forecast_chain_" + slug + "_r" + std::to_string(i + 1);
      w.write(base + ".csv", chain_csv(f.chains[i]));
      w.write(base + "_timing.csv", timing_csv(f.chains[i].likelihood_seconds));
    }
  }
}

void run_report(const fs::path& dir, ArtifactWriter& w) {
  bool any = false;
  if (fs::exists(dir / "chains.json")) {
    const json index = json::parse(read_text_file(dir / "chains.json"));
    json diag = json::array();
    std::vector<Diagnostics> rows;
    std::vector<std::string> labels;
    for (const json& e : index.at("chains")) {
      std::istringstream cin(read_text_file(dir / e.at("chain").get<std::string>()));
      Chain chain = read_chain_csv(cin);
      std::istringstream tin(read_text_file(dir / e.at("timing").get<std::string>()));
      chain.likelihood_seconds = read_timing_csv(tin);
      chain.filter_label = e.at("filter").get<std::string>();
      chain.particles = e.at("particles").get<std::size_t>();
      rows.push_back(diagnose(chain));
      labels.push_back(chain.filter_label);
      diag.push_back(diagnostics_json(rows.back(), chain.filter_label));
    }
    w.write_json("report.json", {{"family", index.at("family")}, {"filters", diag}});
    w.write("report_table.csv", diagnostics_table(rows, labels));
    any = true;
  }
  if (fs::exists(dir / "forecast_report.json")) {
    const json report = json::parse(read_text_file(dir / "forecast_report.json"));
    w.write("report_forecast_table.csv", forecast_table(report));
    any = true;
  }
  if (!any) throw DataError("nothing to report in " + dir.string());
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Calibrate: return "calibrate";
    case Command::Pmmh: return "pmmh";
    case Command::Forecast: return "forecast";
    case Command::Report: return "report";
  }
  return "?";
}

Command parse_command(std::string_view name) {
  for (Command c : {Command::Simulate, Command::Calibrate, Command::Pmmh, Command::Forecast,
                    Command::Report})
    if (to_string(c) == name) return c;
  throw ConfigError("unknown subcommand '" + std::string(name) + "'");
}

bool is_timing_key(std::string_view key) {
  return key == "alct" || key == "seconds" ||
         (key.size() > 8 && key.substr(key.size() - 8) == "_seconds");
}

std::string artifact_checksum(const std::string& name, const std::string& content) {
  auto ends_with = [&](std::string_view s) {
    return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
  };
  if (ends_with("_timing.csv")) return "timing";
  if (ends_with(".json")) {
    try {
      return fnv1a_hex(canonical_json(strip_timing(json::parse(content))));
    } catch (const json::exception&) {
      return fnv1a_hex(content);
    }
  }
  if (ends_with(".csv")) return fnv1a_hex(strip_timing_columns(content));
  return fnv1a_hex(content);
}

ArtifactWriter::ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw DataError("cannot create output directory " + dir_.string());
}

void ArtifactWriter::write(const std::string& name, const std::string& content) {
  const fs::path p = dir_ / (name + ".partial");
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  out << content;
  out.close();
  if (!out) throw DataError("failed writing " + p.string());
  staged_.push_back(name);
  checksums_[name] = artifact_checksum(name, content);
}

void ArtifactWriter::write_json(const std::string& name, const json& j) {
  write(name, j.dump(2) + "\n");
}

std::map<std::string, std::string> ArtifactWriter::commit() {
  for (const auto& name : staged_) fs::rename(dir_ / (name + ".partial"), dir_ / name);
  staged_.clear();
  return checksums_;
}

std::string file_slug(const std::string& label) {
  std::string out;
  for (char ch : label) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      out += ch;
    } else if (ch == '(') {
      out += '_';
    }
  }
  return out;
}

std::vector<double> experiment_data(const ExperimentConfig& c) {
  if (c.data.source == DataConfig::Source::File) {
    fs::path p = c.data.path;
    if (p.is_relative() && !c.base_dir.empty() && !fs::exists(p)) p = c.base_dir / p;
    return load_returns(p).returns;
  }
  const std::uint64_t seed = c.data.seed.value_or(derive_seed(c.seed, 0, kDataSalt));
  if (c.data.dgp == "svij") return simulate_svij(c.data.svij, c.data.length, seed);
  return simulate(c.model(), c.data.length, seed).y;
}

std::string config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("output");
  j.erase("jobs");
  return fnv1a_hex(canonical_json(j));
}

RunSummary run_experiment(Command command, ExperimentConfig config, const RunOptions& options) {
  if (options.jobs) {
    if (*options.jobs == 0) throw ConfigError("--jobs must be at least 1");
    config.jobs = *options.jobs;
  }
  if (options.seed) config.seed = *options.seed;
  fs::path dir = options.out ? *options.out : fs::path(config.output);

  ArtifactWriter w(dir);
  const auto t0 = std::chrono::steady_clock::now();
  spdlog::info("{} '{}' (seed {}, jobs {}) -> {}", to_string(command), config.name, config.seed,
               config.jobs, dir.string());

  switch (command) {
    case Command::Simulate: run_simulate(config, w); break;
    case Command::Calibrate: run_calibrate(config, experiment_data(config), w); break;
    case Command::Pmmh: run_pmmh_command(config, experiment_data(config), w); break;
    case Command::Forecast: run_forecast_command(config, experiment_data(config), w); break;
    case Command::Report: run_report(dir, w); break;
  }

  RunSummary summary;
  summary.output_dir = dir;
  summary.checksums = w.commit();
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summary.manifest = {{"command", std::string(to_string(command))},
                      {"name", config.name},
                      {"config_hash", config_hash(config)},
                      {"seed", config.seed},
                      {"jobs", config.jobs},
                      {"config", to_json(config)},
                      {"artifacts", summary.checksums},
                      {"elapsed_seconds", elapsed}};
  ArtifactWriter mw(dir);
  mw.write_json("manifest_" + std::string(to_string(command)) + ".json", summary.manifest);
  mw.commit();
  return summary;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InputError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 3;
  if (dynamic_cast<const NumericalError*>(&e) || dynamic_cast<const DegeneracyError*>(&e)) return 4;
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return 2;
  return 1;
}

}  // namespace pmmhf
