#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mrsabr/errors.hpp"
#include "mrsabr/surface_io.hpp"

using namespace mrsabr;

namespace {

std::string quote_file(const std::vector<std::string>& dates) {
  std::string text = "as_of,expiry_years,forward,strike,implied_vol\n";
  for (const auto& d : dates)
    for (double t : {0.25, 0.5, 1.0})
      for (double k : {80, 90, 100, 110, 120})
        text += d + "," + format_double(t) + ",100," + format_double(k) + ",0.2\n";
  return text;
}

ErrorCode code_of(std::string_view text) {
  try {
    parse_surfaces(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

std::string message_of(std::string_view text) {
  try {
    parse_surfaces(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

CalibrationResult sample_result(const std::string& as_of, double alpha) {
  CalibrationResult r;
  r.as_of = as_of;
  r.params = {Model::CIRZABR, alpha, 0.1234567890123456789, 9.67, 1.46, -0.7};
  r.rmse = 1.0 / 3.0;
  r.residuals = {1e-7, -2.5e-9, 0.1 + 0.2};
  r.feller = feller_check(r.params);
  r.converged = true;
  r.objective_evals = 1234;
  return r;
}

struct TempDir {
  std::filesystem::path path = std::filesystem::temp_directory_path() /
                               ("mrsabr_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
  TempDir() { std::filesystem::create_directories(path); }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST(LoadSurfaces, GroupsByDate) {
  const auto s = parse_surfaces(quote_file({"2024-01-02", "2024-01-03"}));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].quotes.size(), 15u);
  EXPECT_EQ(s[1].quotes.size(), 15u);
  EXPECT_EQ(s[0].quotes[0].weight, 1.0);
}

TEST(LoadSurfaces, SortsDates) {
  const auto s = parse_surfaces(quote_file({"2024-03-01", "2023-12-29", "2024-01-15"}));
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].as_of, "2023-12-29");
  EXPECT_EQ(s[1].as_of, "2024-01-15");
  EXPECT_EQ(s[2].as_of, "2024-03-01");
}

TEST(LoadSurfaces, OptionalWeightColumnAndCrlf) {
  const auto s = parse_surfaces("as_of,expiry_years,forward,strike,implied_vol,weight\r\n"
                                "2024-01-02,0.5,100,95,0.21,2.5\r\n");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].quotes[0].weight, 2.5);
  EXPECT_EQ(s[0].quotes[0].strike, 95.0);
}

TEST(LoadSurfaces, RejectsZeroStrikeWithRowNumber) {
  const std::string text = "as_of,expiry_years,forward,strike,implied_vol\n"
                           "2024-01-02,0.5,100,95,0.21\n"
                           "2024-01-02,0.5,100,0,0.21\n";
  EXPECT_EQ(code_of(text), ErrorCode::ParseError);
  const auto msg = message_of(text);
  EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("strike"), std::string::npos) << msg;
}

TEST(LoadSurfaces, StrictParsing) {
  const std::string head = "as_of,expiry_years,forward,strike,implied_vol\n";
  EXPECT_EQ(code_of(head + "2024-01-02,0.5,100,95,0.2x\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of(head + "2024-01-02,0.5,100,95\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of(head + "02/01/2024,0.5,100,95,0.2\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of(head + "2024-01-02,nan,100,95,0.2\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("date,t,f,k,vol\n2024-01-02,0.5,100,95,0.2\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("as_of,expiry_years,forward,strike,implied_vol,weight\n2024-01-02,0.5,100,95,0.2,-1\n"),
            ErrorCode::ParseError);
}

TEST(LoadSurfaces, EmptyFiles) {
  EXPECT_EQ(code_of(""), ErrorCode::EmptyFile);
  EXPECT_EQ(code_of("\n\n"), ErrorCode::EmptyFile);
  EXPECT_EQ(code_of("as_of,expiry_years,forward,strike,implied_vol\n"), ErrorCode::EmptyFile);
}

TEST(LoadSurfaces, MissingFile) {
  try {
    load_surfaces("/nonexistent/quotes.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(LoadSurfaces, WriteReadPreservesQuotesExactly) {
  VolSurface s;
  s.as_of = "2024-05-06";
  for (int i = 0; i < 6; ++i) s.quotes.push_back({0.1 * (i + 1) / 3.0, 100.0 / 7.0, 90.0 + i / 3.0, 0.2 + 1e-17 * i, 1.0});
  const auto back = parse_surfaces(format_surfaces({s}));
  ASSERT_EQ(back.size(), 1u);
  for (std::size_t i = 0; i < s.quotes.size(); ++i) {
    EXPECT_EQ(back[0].quotes[i].t_ex, s.quotes[i].t_ex);
    EXPECT_EQ(back[0].quotes[i].forward, s.quotes[i].forward);
    EXPECT_EQ(back[0].quotes[i].strike, s.quotes[i].strike);
    EXPECT_EQ(back[0].quotes[i].market_vol, s.quotes[i].market_vol);
  }
}

TEST(Results, JsonRoundTripIsByteIdentical) {
  TempDir dir;
  const std::vector<CalibrationResult> rs{sample_result("2024-01-02", 0.12), sample_result("2024-01-03", 0.1 + 0.2)};
  write_results(rs, dir.path / "a.json", ResultFormat::JSON);
  const auto back = read_results(dir.path / "a.json");
  write_results(back, dir.path / "b.json", ResultFormat::JSON);
  std::ifstream a(dir.path / "a.json"), b(dir.path / "b.json");
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].params.alpha, 0.1 + 0.2);
  EXPECT_EQ(back[0].params.theta, 0.1234567890123456789);
  EXPECT_EQ(back[0].residuals, rs[0].residuals);
  EXPECT_EQ(back[0].rmse, 1.0 / 3.0);
  EXPECT_EQ(back[0].params.model, Model::CIRZABR);
}

TEST(Results, JsonSchema) {
  const auto text = format_results({sample_result("2024-01-02", 0.12)}, ResultFormat::JSON);
  for (const char* key : {"\"params\"", "\"rmse\"", "\"feller\"", "\"residuals\"", "\"model\"", "\"as_of\"",
                          "\"satisfied\"", "\"margin\""}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

TEST(Results, CsvRoundTripAndColumnOrder) {
  const std::vector<CalibrationResult> rs{sample_result("2024-01-02", 0.12)};
  const auto text = format_results(rs, ResultFormat::CSV);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "as_of,model,alpha,theta,lambda,nu,rho,rmse,converged,objective_evals,feller_lhs,feller_rhs,"
            "feller_satisfied,residuals");
  const auto back = parse_results(text);
  EXPECT_EQ(format_results(back, ResultFormat::CSV), text);
  EXPECT_EQ(back[0].residuals, rs[0].residuals);
}

TEST(Results, FormatFromExtension) {
  EXPECT_EQ(format_for("out.CSV"), ResultFormat::CSV);
  EXPECT_EQ(format_for("out.json"), ResultFormat::JSON);
  EXPECT_EQ(format_for("out"), ResultFormat::JSON);
}

TEST(Results, MalformedInput) {
  EXPECT_THROW(parse_results("[{\"as_of\": 1}]"), Error);
  EXPECT_THROW(parse_results("[1, 2"), Error);
  EXPECT_THROW(parse_results("   "), Error);
}

TEST(Results, UnwritablePath) {
  try {
    write_results({}, "/nonexistent/dir/out.json", ResultFormat::JSON);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}
