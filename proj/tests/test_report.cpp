#include <gtest/gtest.h>

#include <fstream>
#include <regex>

#include "somqe/report.hpp"
#include "test_util.hpp"

using namespace somqe;

namespace {

SeriesResult sample_result() {
  auto spec = SeriesSpec::defaults(SeriesKind::CheckerCount);
  spec.width = 60;
  spec.height = 60;
  SomConfig som;
  som.iterations = 300;
  return run_generated_series(spec, som, Patch{4}, TrainingMode::ReferenceTrained);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_matches(const std::string& text, const std::string& pattern) {
  const std::regex re(pattern);
  return std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator());
}

}  // namespace

TEST(ReportFormats, Parse) {
  EXPECT_EQ(parse_report_formats("csv").size(), 1u);
  EXPECT_EQ(parse_report_formats("all").size(), 3u);
  EXPECT_EQ(parse_report_formats("json,svg").size(), 2u);
  EXPECT_THROW(parse_report_formats("xml"), ConfigError);
  EXPECT_THROW(parse_report_formats(""), ConfigError);
}

TEST(CsvReport, OneRowPerImage) {
  const auto r = sample_result();
  const auto csv = csv_report(r);
  EXPECT_EQ(csv.rfind("series_id,image_index,delta_pct,qe,ms\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(r.records.size() + 1));
  EXPECT_NE(csv.find("\nchecker-count,1,8,"), std::string::npos);
}

TEST(CsvReport, TimingCanBeSuppressed) {
  const auto csv = csv_report(sample_result(), ReportOptions{false});
  EXPECT_EQ(count_matches(csv, ",0\\.000\n"), 9u);
}

TEST(JsonReport, RoundTrip) {
  const auto r = sample_result();
  const auto j = to_json(r);
  EXPECT_EQ(j.at("schema_version"), kReportSchemaVersion);
  EXPECT_EQ(j.at("records").size(), 9u);
  EXPECT_EQ(series_result_from_json(j), r);
  EXPECT_EQ(to_json(series_result_from_json(j)).dump(), j.dump());
}

TEST(JsonReport, RoundTripThroughFile) {
  TempDir dir;
  const auto r = sample_result();
  const auto paths = emit_report(r, dir.path(), {ReportFormat::Json});
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].filename(), "checker-count.json");
  EXPECT_EQ(load_report_json(paths[0]), r);
}

TEST(JsonReport, MalformedIsFormatError) {
  TempDir dir;
  std::ofstream(dir / "bad.json") << "{\"schema_version\": 1";
  EXPECT_THROW(load_report_json(dir / "bad.json"), FormatError);
  EXPECT_THROW(series_result_from_json(nlohmann::json{{"records", 3}}), FormatError);
  EXPECT_THROW(load_report_json(dir / "absent.json"), IoError);
}

TEST(JsonReport, ConfigConverters) {
  SomConfig som;
  som.rows = 3;
  som.radius_schedule = RadiusSchedule::Exponential;
  EXPECT_EQ(som_config_from_json(to_json(som)), som);
  const auto spec = SeriesSpec::defaults(SeriesKind::CheckerSize);
  EXPECT_EQ(series_spec_from_json(to_json(spec)), spec);
  for (ExtractionStrategy s : {ExtractionStrategy{PixelScalar{}}, ExtractionStrategy{Patch{7}},
                               ExtractionStrategy{PixelPosition{}}})
    EXPECT_EQ(strategy_from_json(to_json(s)), s);
}

TEST(SvgReport, OneMarkerPerImageAndOneLine) {
  const auto r = sample_result();
  const auto svg = svg_report(r);
  EXPECT_EQ(count_matches(svg, "<circle "), r.records.size());
  EXPECT_EQ(count_matches(svg, "<line "), 1u);
  EXPECT_NE(svg.find("class=\"axes\""), std::string::npos);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(SvgReport, DegenerateSeriesStillRenders) {
  const std::vector<GrayImage> images(3, GrayImage(8, 8, 0));
  const std::vector<double> deltas{0, 0, 0};
  SomConfig som;
  som.iterations = 10;
  const auto r = run_series(images, deltas, som, Patch{4}, TrainingMode::ReferenceTrained);
  const auto svg = svg_report(r);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
  EXPECT_NE(svg.find("degenerate"), std::string::npos);
}

TEST(EmitReport, WritesAllFormats) {
  TempDir dir;
  const auto paths = emit_report(sample_result(), dir / "out", parse_report_formats("all"));
  ASSERT_EQ(paths.size(), 3u);
  for (const auto& p : paths) EXPECT_FALSE(slurp(p).empty()) << p;
}

TEST(EmitReport, UnwritableDirectoryIsIoError) {
  TempDir dir;
  std::ofstream(dir / "file") << "x";
  EXPECT_THROW(emit_report(sample_result(), dir / "file" / "sub", {ReportFormat::Csv}), IoError);
}
