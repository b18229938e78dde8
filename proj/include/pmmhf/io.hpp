#ifndef PMMHF_IO_HPP
#define PMMHF_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pmmhf/forecast.hpp"
#include "pmmhf/pmmh.hpp"

namespace pmmhf {

struct ReturnsSeries {
  std::vector<std::string> dates;  // empty when the file has no date column
  std::vector<double> returns;
  std::string source;
};

/// CSV with a header of either `date,return` or `return`. Any empty,
/// malformed or non-finite return is a DataError naming the line.
/// Non-increasing dates only log a warning.
ReturnsSeries load_returns(const std::filesystem::path& path);
ReturnsSeries parse_returns(std::istream& in, const std::string& source);
void write_returns(std::ostream& out, const ReturnsSeries& series);

/// Shortest-exact text for a double ("%.17g"); "nan", "inf", "-inf" otherwise.
std::string format_double(double x);
/// Inverse of format_double; DataError on junk.
double parse_double(const std::string& text);

/// iter, <names...>, loglik, logprior, accepted, burn_in
void write_chain_csv(std::ostream& out, const Chain& chain);
Chain read_chain_csv(std::istream& in);

/// One row per timed likelihood evaluation.
void write_timing_csv(std::ostream& out, const std::vector<double>& seconds);
std::vector<double> read_timing_csv(std::istream& in);

/// Two columns: z, density. The realized value is not stored.
void write_density_csv(std::ostream& out, const PredictiveDensity& pd);
PredictiveDensity read_density_csv(std::istream& in);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace pmmhf

#endif
