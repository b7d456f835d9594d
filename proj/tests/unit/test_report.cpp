#include <gtest/gtest.h>

#include <regex>
#include <string>
#include <vector>

#include "premium/error.hpp"
#include "premium/report.hpp"
#include "synthetic.hpp"

namespace premium {
namespace {

// Tag balance plus attribute quoting; enough to catch broken markup.
bool well_formed(const std::string& xml, std::string* why) {
  std::vector<std::string> stack;
  std::size_t pos = 0;
  bool root_seen = false;
  while ((pos = xml.find('<', pos)) != std::string::npos) {
    const std::size_t end = xml.find('>', pos);
    if (end == std::string::npos) {
      *why = "unterminated tag";
      return false;
    }
    std::string tag = xml.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.starts_with("?") || tag.starts_with("!--")) continue;
    if (tag.starts_with("/")) {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) {
        *why = "unexpected </" + name + ">";
        return false;
      }
      stack.pop_back();
      continue;
    }
    if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) {
      *why = "odd quotes in <" + tag + ">";
      return false;
    }
    const bool self_closing = tag.ends_with("/");
    const std::string name = tag.substr(0, tag.find_first_of(" /"));
    if (stack.empty()) {
      if (root_seen) {
        *why = "second root element";
        return false;
      }
      root_seen = true;
    }
    if (!self_closing) stack.push_back(name);
  }
  if (!stack.empty()) {
    *why = "unclosed <" + stack.back() + ">";
    return false;
  }
  return root_seen;
}

void expect_valid_svg(const std::string& svg) {
  std::string why;
  EXPECT_TRUE(well_formed(svg, &why)) << why;
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
}

struct Line {
  double x1, y1, x2, y2;
};

std::vector<Line> dashed_lines(const std::string& svg) {
  static const std::regex re(
      R"re(<line x1="([-\d.]+)" y1="([-\d.]+)" x2="([-\d.]+)" y2="([-\d.]+)"[^>]*stroke-dasharray)re");
  std::vector<Line> out;
  for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end; ++it) {
    out.push_back({std::stod((*it)[1]), std::stod((*it)[2]), std::stod((*it)[3]),
                   std::stod((*it)[4])});
  }
  return out;
}

FigureSpec spec(FigureKind kind) {
  return {kind, "Title & <co>", "x", "y", Json{{"seed", 1}}};
}

TEST(Render, EveryKindIsWellFormedAndDeterministic) {
  CorrelationMatrix corr{{"a", "b"}, Matrix::from_rows({{1, -0.3}, {-0.3, 1}})};
  std::vector<BoxGroup> groups = {{"0", {1, 2, 3, 4, 50}}, {"1", {2, 3}}};
  LearningCurve curve{{0.5, 1.0}, {40, 80}, {0.9, 0.85}, {0.6, 0.7}};
  XyData xy{{1, 2, 3}, {1.5, 1.8, 3.3}};
  std::vector<QqPoint> qq = {{-1, -1.2}, {0, 0.1}, {1, 0.9}};
  std::vector<BeeswarmFeature> bees = {{0, "a", {1, -1, 0.5}, {0, 1, 0.5}}};
  GlobalImportance imp{{"a", "b"}, {4, 2}, {2, 1}, {0, 1}};
  IceCurveSet ice;
  ice.feature_name = "a";
  ice.grid = {0, 1, 2};
  ice.curves = Matrix::from_rows({{1, 2, 3}, {2, 2, 2}});
  ice.pdp = {1.5, 2, 2.5};
  const std::vector<std::pair<FigureKind, FigureData>> cases = {
      {FigureKind::kCorrelationHeatmap, corr}, {FigureKind::kGroupBoxplot, groups},
      {FigureKind::kLearningCurve, curve},     {FigureKind::kResidualScatter, xy},
      {FigureKind::kQq, qq},                   {FigureKind::kPredictionError, xy},
      {FigureKind::kBeeswarm, bees},           {FigureKind::kImportanceBar, imp},
      {FigureKind::kIcePanel, ice},
  };
  for (const auto& [kind, data] : cases) {
    const std::string a = render(spec(kind), data);
    expect_valid_svg(a);
    EXPECT_EQ(a, render(spec(kind), data)) << figure_kind_name(kind);
    EXPECT_NE(a.find("Title &amp; &lt;co&gt;"), std::string::npos);
    EXPECT_NE(a.find("<metadata>"), std::string::npos);
  }
}

TEST(Render, ShapeMismatchNamesTheKind) {
  const XyData xy{{1, 2}, {1}};
  try {
    render(spec(FigureKind::kResidualScatter), xy);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(figure_kind_name(FigureKind::kResidualScatter)),
              std::string::npos);
  }
  EXPECT_THROW(render(spec(FigureKind::kQq), XyData{{1}, {1}}), ValidationError);
  EXPECT_THROW(render(spec(FigureKind::kResidualScatter), XyData{}), ValidationError);
  EXPECT_THROW(render(spec(FigureKind::kResidualScatter), XyData{{1, std::nan("")}, {1, 2}}),
               ValidationError);
}

TEST(Render, PredictionErrorIdentityLineIsDiagonal) {
  const XyData xy{{15000, 22000, 31000}, {16000, 23000, 29000}};
  const auto lines = dashed_lines(render(spec(FigureKind::kPredictionError), xy));
  ASSERT_EQ(lines.size(), 1u);
  const Line& l = lines[0];
  EXPECT_NEAR(l.x2 - l.x1, l.y1 - l.y2, 0.02);
  EXPECT_GT(l.x2, l.x1);
}

TEST(Render, ResidualPlotHasHorizontalZeroLine) {
  const XyData xy{{1, 2, 3, 4}, {-2, 1, 0.5, -0.5}};
  const auto lines = dashed_lines(render(spec(FigureKind::kResidualScatter), xy));
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0].y1, lines[0].y2);
  EXPECT_LT(lines[0].x1, lines[0].x2);
}

TEST(Render, WriteFigureCreatesFile) {
  const auto dir = testing::fresh_temp_dir("report_write");
  const XyData xy{{1, 2}, {1, 2}};
  write_figure(dir / "sub" / "f.svg", spec(FigureKind::kPredictionError), xy);
  EXPECT_TRUE(std::filesystem::exists(dir / "sub" / "f.svg"));
  EXPECT_THROW(write_figure(dir / "g.svg", spec(FigureKind::kQq), xy), ValidationError);
  EXPECT_FALSE(std::filesystem::exists(dir / "g.svg"));
}

TEST(BoxStats, QuartilesWhiskersOutliers) {
  const std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 100};
  const auto s = box_stats(v);
  EXPECT_DOUBLE_EQ(s.q1, 3);
  EXPECT_DOUBLE_EQ(s.median, 5);
  EXPECT_DOUBLE_EQ(s.q3, 7);
  EXPECT_DOUBLE_EQ(s.whisker_low, 1);
  EXPECT_DOUBLE_EQ(s.whisker_high, 8);
  EXPECT_EQ(s.outliers, (std::vector<double>{100}));
  const std::vector<double> one = {4};
  const auto t = box_stats(one);
  EXPECT_EQ(t.whisker_low, 4);
  EXPECT_EQ(t.whisker_high, 4);
  EXPECT_THROW(box_stats(std::vector<double>{}), ValidationError);
}

TEST(Swarm, OffsetsAlternateOutward) {
  const std::vector<double> px = {10, 10.5, 11, 11.2, 50};
  const auto o = swarm_offsets(px, 4.0);
  EXPECT_EQ(o[0], 0.0);
  EXPECT_EQ(o[1], 1.0);
  EXPECT_EQ(o[2], -1.0);
  EXPECT_EQ(o[3], 2.0);
  EXPECT_EQ(o[4], 0.0);
  EXPECT_THROW(swarm_offsets(px, 0.0), ValidationError);
}

TEST(Swarm, AxisRangeCoversAllValues) {
  const std::vector<BeeswarmFeature> bees = {{0, "a", {-3, 2}, {0, 1}}, {1, "b", {7}, {0.5}}};
  const auto [lo, hi] = beeswarm_axis_range(bees);
  EXPECT_LE(lo, -3);
  EXPECT_GE(hi, 7);
}

TEST(Escape, XmlSpecialCharacters) {
  EXPECT_EQ(xml_escape("a<b>&\"'"), "a&lt;b&gt;&amp;&quot;&apos;");
}

TEST(Tables, MetricsTableFormatting) {
  const std::vector<ModelMetricsRow> rows = {
      {"XGBoost", {0.8647, 1234.5678, 2345.1, 7.25, 246}},
      {"RF", {0.8, 1, 2, 3, 246}},
  };
  const std::string csv = metrics_table_csv(rows, "p");
  EXPECT_EQ(csv, "# p\nModel,R2,MAE,RMSE,MAPE\nXGBoost,86.470,1234.568,2345.100,7.250\n"
                 "RF,80.000,1.000,2.000,3.000\n");
  EXPECT_THROW(metrics_table_csv({}, "p"), ValidationError);
}

TEST(Tables, SummaryTable) {
  SummaryStats stats;
  stats.columns.push_back({"Age", 3, 40.956, 14.8, 18, 29.25, 39.5, 52.25, 66});
  const std::string csv = summary_table_csv(stats, "p");
  EXPECT_EQ(csv, "# p\nFeatures,Mean,STD,Min,Q1,Median,Q3,Max\n"
                 "Age,40.96,14.80,18.00,29.25,39.50,52.25,66.00\n");
}

TEST(Tables, TuningAndImprovementTables) {
  const std::vector<TuningRow> tuning = {
      {"GBM", 0.79842, "n_estimators: [10, 15]", 0.72999, "learning_rate: 0.19; n_estimators: 19"}};
  const std::string t = tuning_table_csv(tuning, "p");
  EXPECT_NE(t.find("Model,TrainR2,TuningParameters,CvR2,BestParameters\n"), std::string::npos);
  EXPECT_NE(t.find("GBM,79.842,"), std::string::npos) << t;
  EXPECT_NE(t.find("72.999"), std::string::npos) << t;
  const std::vector<ImprovementRow> imp = {{"XGBoost", 88.222, 74.475, 86.47, 11.995}};
  EXPECT_EQ(improvement_table_csv(imp, "p"),
            "# p\nModel,TrainR2,CvR2,TestR2,Improvement\nXGBoost,88.222,74.475,86.470,11.995\n");
}

TEST(Tables, DescribeParams) {
  EXPECT_EQ(describe_params(Json{{"learning_rate", 0.19}, {"n_estimators", 19}}),
            "learning_rate: 0.19; n_estimators: 19");
}

}  // namespace
}  // namespace premium
