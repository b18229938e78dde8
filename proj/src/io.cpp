#include "pmmhf/io.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pmmhf/error.hpp"

namespace pmmhf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool next_row(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!trim(line).empty()) return true;
  }
  return false;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  if (t == "nan") return std::nan("");
  if (t == "inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || ptr != end)
    throw DataError("not a number: '" + t + "'");
  return v;
}

ReturnsSeries parse_returns(std::istream& in, const std::string& source) {
  ReturnsSeries out;
  out.source = source;
  std::string line;
  if (!next_row(in, line)) throw DataError(source + ": empty file");
  const auto header = split(line);
  bool dated = false;
  if (header.size() == 2 && lower(header[0]) == "date" && lower(header[1]) == "return") {
    dated = true;
  } else if (!(header.size() == 1 && lower(header[0]) == "return")) {
    throw DataError(source + ": header must be 'date,return' or 'return'");
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw DataError(source + ": line " + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " column(s)");
    const std::string& cell = cells.back();
    if (cell.empty())
      throw DataError(source + ": line " + std::to_string(lineno) + ": empty return");
    double v = 0.0;
    try {
      v = parse_double(cell);
    } catch (const DataError&) {
      throw DataError(source + ": line " + std::to_string(lineno) + ": malformed return '" +
                      cell + "'");
    }
    if (!std::isfinite(v))
      throw DataError(source + ": line " + std::to_string(lineno) + ": non-finite return");
    if (dated) {
      if (!out.dates.empty() && cells[0] <= out.dates.back())
        spdlog::warn("{}: line {}: dates are not increasing", source, lineno);
      out.dates.push_back(cells[0]);
    }
    out.returns.push_back(v);
  }
  return out;
}

ReturnsSeries load_returns(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_returns(in, path.string());
}

void write_returns(std::ostream& out, const ReturnsSeries& series) {
  const bool dated = !series.dates.empty();
  out << (dated ? "date,return\n" : "return\n");
  for (std::size_t i = 0; i < series.returns.size(); ++i) {
    if (dated) out << series.dates[i] << ',';
    out << format_double(series.returns[i]) << '\n';
  }
}

void write_chain_csv(std::ostream& out, const Chain& chain) {
  out << "iter";
  for (const auto& n : chain.names) out << ',' << n;
  out << ",loglik,logprior,accepted,burn_in\n";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    out << i;
    for (double v : chain.draws[i]) out << ',' << format_double(v);
    out << ',' << format_double(chain.loglik[i]) << ',' << format_double(chain.logprior[i]) << ','
        << (chain.accepted[i] ? 1 : 0) << ',' << (i < chain.burn_in ? 1 : 0) << '\n';
  }
}

Chain read_chain_csv(std::istream& in) {
  std::string line;
  if (!next_row(in, line)) throw DataError("empty chain file");
  const auto header = split(line);
  if (header.size() < 5 || header.front() != "iter" || header.back() != "burn_in")
    throw DataError("unrecognized chain header");
  Chain chain;
  chain.names.assign(header.begin() + 1, header.end() - 4);
  const std::size_t d = chain.names.size();
  std::size_t lineno = 1;
  while (next_row(in, line)) {
    ++lineno;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw DataError("chain file line " + std::to_string(lineno) + ": wrong column count");
    std::vector<double> row(d);
    for (std::size_t k = 0; k < d; ++k) row[k] = parse_double(cells[1 + k]);
    chain.draws.push_back(std::move(row));
    chain.loglik.push_back(parse_double(cells[1 + d]));
    chain.logprior.push_back(parse_double(cells[2 + d]));
    chain.accepted.push_back(cells[3 + d] == "1" ? 1 : 0);
    if (cells[4 + d] == "1") chain.burn_in = chain.draws.size();
  }
  return chain;
}

void write_timing_csv(std::ostream& out, const std::vector<double>& seconds) {
  out << "seconds\n";
  for (double s : seconds) out << format_double(s) << '\n';
}

std::vector<double> read_timing_csv(std::istream& in) {
  std::string line;
  if (!next_row(in, line) || trim(line) != "seconds") throw DataError("unrecognized timing header");
  std::vector<double> out;
  while (next_row(in, line)) out.push_back(parse_double(line));
  return out;
}

void write_density_csv(std::ostream& out, const PredictiveDensity& pd) {
  out << "z,density\n";
  for (std::size_t i = 0; i < pd.grid.size(); ++i)
    out << format_double(pd.grid[i]) << ',' << format_double(pd.density[i]) << '\n';
}

PredictiveDensity read_density_csv(std::istream& in) {
  std::string line;
  if (!next_row(in, line) || trim(line) != "z,density")
    throw DataError("unrecognized density header");
  PredictiveDensity pd;
  while (next_row(in, line)) {
    const auto cells = split(line);
    if (cells.size() != 2) throw DataError("density file: wrong column count");
    pd.grid.push_back(parse_double(cells[0]));
    pd.density.push_back(parse_double(cells[1]));
  }
  return pd;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pmmhf
