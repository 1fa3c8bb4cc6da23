#include "mrsabr/surface_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mrsabr/errors.hpp"

namespace mrsabr {

namespace {

using json = nlohmann::json;

constexpr std::array<std::string_view, 6> kQuoteColumns{"as_of", "expiry_years", "forward", "strike",
                                                        "implied_vol", "weight"};
constexpr std::string_view kResultHeader =
    "as_of,model,alpha,theta,lambda,nu,rho,rmse,converged,objective_evals,feller_lhs,feller_rhs,"
    "feller_satisfied,residuals";

[[noreturn]] void parse_error(std::size_t row, std::string_view column, const std::string& what) {
  std::ostringstream os;
  os << "row " << row;
  if (!column.empty()) os << ", column '" << column << "'";
  os << ": " << what;
  throw Error(ErrorCode::ParseError, os.str());
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) return out;
    pos = next + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  auto lines = split(text, '\n');
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  return lines;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

double field(std::string_view s, std::size_t row, std::string_view column, bool allow_zero = false) {
  const auto v = to_double(s);
  if (!v || !std::isfinite(*v)) parse_error(row, column, "'" + std::string(s) + "' is not a finite number");
  if (allow_zero ? *v < 0.0 : *v <= 0.0) {
    parse_error(row, column, "value " + std::string(s) + (allow_zero ? " is negative" : " is not positive"));
  }
  return *v;
}

bool iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

std::string json_string(std::string_view s) { return json(std::string(s)).dump(); }

void write_json_result(std::ostringstream& os, const CalibrationResult& r) {
  const auto& p = r.params;
  os << "  {\n"
     << "    \"as_of\": " << json_string(r.as_of) << ",\n"
     << "    \"model\": " << json_string(to_string(p.model)) << ",\n"
     << "    \"params\": {\"alpha\": " << format_double(p.alpha) << ", \"theta\": " << format_double(p.theta)
     << ", \"lambda\": " << format_double(p.lambda) << ", \"nu\": " << format_double(p.nu)
     << ", \"rho\": " << format_double(p.rho) << "},\n"
     << "    \"rmse\": " << format_double(r.rmse) << ",\n"
     << "    \"converged\": " << (r.converged ? "true" : "false") << ",\n"
     << "    \"objective_evals\": " << r.objective_evals << ",\n"
     << "    \"feller\": {\"condition\": " << json_string(r.feller.condition)
     << ", \"lhs\": " << format_double(r.feller.lhs) << ", \"rhs\": " << format_double(r.feller.rhs)
     << ", \"margin\": " << format_double(r.feller.margin())
     << ", \"satisfied\": " << (r.feller.satisfied ? "true" : "false") << "},\n"
     << "    \"residuals\": [";
  for (std::size_t i = 0; i < r.residuals.size(); ++i) os << (i ? ", " : "") << format_double(r.residuals[i]);
  os << "]\n  }";
}

CalibrationResult result_from_json(const json& j) {
  CalibrationResult r;
  r.as_of = j.at("as_of").get<std::string>();
  r.params.model = parse_model(j.at("model").get<std::string>());
  const auto& p = j.at("params");
  r.params.alpha = p.at("alpha").get<double>();
  r.params.theta = p.at("theta").get<double>();
  r.params.lambda = p.at("lambda").get<double>();
  r.params.nu = p.at("nu").get<double>();
  r.params.rho = p.at("rho").get<double>();
  r.rmse = j.at("rmse").get<double>();
  r.converged = j.value("converged", true);
  r.objective_evals = j.value("objective_evals", 0);
  r.feller = feller_check(r.params);
  r.residuals = j.at("residuals").get<std::vector<double>>();
  return r;
}

std::vector<CalibrationResult> parse_results_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("result JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::ParseError, "result JSON must be an array");
  std::vector<CalibrationResult> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    try {
      out.push_back(result_from_json(doc[i]));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "result " + std::to_string(i) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "result " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<CalibrationResult> parse_results_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != kResultHeader) parse_error(1, "", "unexpected result CSV header");
  std::vector<CalibrationResult> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const std::size_t row = i + 1;
    const auto f = split(lines[i], ',');
    if (f.size() != 14) parse_error(row, "", "expected 14 fields, got " + std::to_string(f.size()));
    auto num = [&](std::size_t k, std::string_view col) {
      const auto v = to_double(f[k]);
      if (!v) parse_error(row, col, "'" + std::string(f[k]) + "' is not a number");
      return *v;
    };
    CalibrationResult r;
    r.as_of = std::string(f[0]);
    try {
      r.params.model = parse_model(f[1]);
    } catch (const Error&) {
      parse_error(row, "model", "unknown model '" + std::string(f[1]) + "'");
    }
    r.params.alpha = num(2, "alpha");
    r.params.theta = num(3, "theta");
    r.params.lambda = num(4, "lambda");
    r.params.nu = num(5, "nu");
    r.params.rho = num(6, "rho");
    r.rmse = num(7, "rmse");
    r.converged = f[8] == "true";
    r.objective_evals = static_cast<int>(num(9, "objective_evals"));
    r.feller = feller_check(r.params);
    if (!f[13].empty())
      for (auto s : split(f[13], ';')) {
        const auto v = to_double(s);
        if (!v) parse_error(row, "residuals", "'" + std::string(s) + "' is not a number");
        r.residuals.push_back(*v);
      }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<VolSurface> parse_surfaces(std::string_view text) {
  const auto lines = lines_of(text);
  std::size_t first = 0;
  while (first < lines.size() && blank(lines[first])) ++first;
  if (first == lines.size()) throw Error(ErrorCode::EmptyFile, "quote file is empty");

  const auto header = split(lines[first], ',');
  const bool weighted = header.size() == 6;
  if (header.size() < 5 || header.size() > 6 || !std::equal(header.begin(), header.end(), kQuoteColumns.begin())) {
    parse_error(first + 1, "", "header must be 'as_of,expiry_years,forward,strike,implied_vol[,weight]'");
  }

  std::map<std::string, VolSurface> by_date;
  std::size_t rows = 0;
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const std::size_t row = i + 1;
    const auto f = split(lines[i], ',');
    if (f.size() != header.size()) {
      parse_error(row, "", "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    }
    if (!iso_date(f[0])) parse_error(row, "as_of", "'" + std::string(f[0]) + "' is not a YYYY-MM-DD date");
    VolQuote q;
    q.t_ex = field(f[1], row, "expiry_years");
    q.forward = field(f[2], row, "forward");
    q.strike = field(f[3], row, "strike");
    q.market_vol = field(f[4], row, "implied_vol");
    if (weighted) q.weight = field(f[5], row, "weight", true);
    auto& s = by_date[std::string(f[0])];
    s.as_of = std::string(f[0]);
    s.quotes.push_back(q);
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::EmptyFile, "quote file has a header but no rows");

  std::vector<VolSurface> out;
  for (auto& [date, s] : by_date) out.push_back(std::move(s));
  return out;
}

std::vector<VolSurface> load_surfaces(const std::filesystem::path& path) { return parse_surfaces(read_file(path)); }

std::string format_surfaces(const std::vector<VolSurface>& surfaces) {
  std::ostringstream os;
  os << "as_of,expiry_years,forward,strike,implied_vol,weight\n";
  for (const auto& s : surfaces)
    for (const auto& q : s.quotes)
      os << s.as_of << ',' << format_double(q.t_ex) << ',' << format_double(q.forward) << ','
         << format_double(q.strike) << ',' << format_double(q.market_vol) << ',' << format_double(q.weight) << '\n';
  return os.str();
}

void write_surfaces(const std::vector<VolSurface>& surfaces, const std::filesystem::path& path) {
  write_file(path, format_surfaces(surfaces));
}

ResultFormat format_for(const std::filesystem::path& path) noexcept {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? ResultFormat::CSV : ResultFormat::JSON;
}

std::string format_results(const std::vector<CalibrationResult>& results, ResultFormat format) {
  std::ostringstream os;
  if (format == ResultFormat::JSON) {
    os << "[";
    for (std::size_t i = 0; i < results.size(); ++i) {
      os << (i ? ",\n" : "\n");
      write_json_result(os, results[i]);
    }
    os << (results.empty() ? "]\n" : "\n]\n");
    return os.str();
  }
  os << kResultHeader << '\n';
  for (const auto& r : results) {
    const auto& p = r.params;
    os << r.as_of << ',' << to_string(p.model) << ',' << format_double(p.alpha) << ',' << format_double(p.theta)
       << ',' << format_double(p.lambda) << ',' << format_double(p.nu) << ',' << format_double(p.rho) << ','
       << format_double(r.rmse) << ',' << (r.converged ? "true" : "false") << ',' << r.objective_evals << ','
       << format_double(r.feller.lhs) << ',' << format_double(r.feller.rhs) << ','
       << (r.feller.satisfied ? "true" : "false") << ',';
    for (std::size_t i = 0; i < r.residuals.size(); ++i) os << (i ? ";" : "") << format_double(r.residuals[i]);
    os << '\n';
  }
  return os.str();
}

void write_results(const std::vector<CalibrationResult>& results, const std::filesystem::path& path,
                   ResultFormat format) {
  write_file(path, format_results(results, format));
}

std::vector<CalibrationResult> parse_results(std::string_view text) {
  const auto start = text.find_first_not_of(" \t\r\n");
  if (start == std::string_view::npos) throw Error(ErrorCode::EmptyFile, "result file is empty");
  return text[start] == '[' ? parse_results_json(text) : parse_results_csv(text.substr(start));
}

std::vector<CalibrationResult> read_results(const std::filesystem::path& path) {
  return parse_results(read_file(path));
}

}  // namespace mrsabr
