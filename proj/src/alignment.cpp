#include <algorithm>
#include <charconv>
#include <cmath>

#include "dcs/csv.hpp"
#include "dcs/error.hpp"
#include "dcs/evalstats.hpp"

namespace dcs {

namespace {

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && end[-1] == ' ') --end;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v))
    throw ParseError("expected a finite number, got '" + s + "'", line);
  return v;
}

Date parse_date(const std::string& s, std::size_t line) {
  try {
    return Date::parse(s);
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), line);
  }
}

}  // namespace

MacroSeries load_macro_csv(const std::filesystem::path& path, std::string indicator) {
  const auto t = read_csv(path);
  const auto dc = t.column("date");
  const auto vc = t.column("value");
  MacroSeries s{std::move(indicator), {}};
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto line = t.line_numbers[i];
    // FRED exports mark missing values with "."
    if (t.rows[i][vc] == "." || t.rows[i][vc].empty()) continue;
    Observation o{parse_date(t.rows[i][dc], line), parse_number(t.rows[i][vc], line)};
    if (!s.observations.empty() && !(s.observations.back().date < o.date))
      throw ParseError("dates must be strictly increasing", line);
    s.observations.push_back(o);
  }
  return s;
}

std::vector<YieldRow> load_yield_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const auto dc = t.column("date");
  const auto c2 = t.column("y2");
  const auto c10 = t.column("y10");
  const auto c20 = t.column("y20");
  std::vector<YieldRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto line = t.line_numbers[i];
    const auto& r = t.rows[i];
    YieldRow y{parse_date(r[dc], line), parse_number(r[c2], line), parse_number(r[c10], line),
               parse_number(r[c20], line)};
    if (!rows.empty() && !(rows.back().date < y.date))
      throw ParseError("dates must be strictly increasing", line);
    rows.push_back(y);
  }
  return rows;
}

MacroSeries yield_series(const std::vector<YieldRow>& rows, int maturity) {
  MacroSeries s{"y" + std::to_string(maturity), {}};
  for (const auto& r : rows) {
    double v;
    switch (maturity) {
      case 2: v = r.y2; break;
      case 10: v = r.y10; break;
      case 20: v = r.y20; break;
      default: throw ValidationError("unsupported maturity " + std::to_string(maturity));
    }
    s.observations.push_back({r.date, v});
  }
  return s;
}

namespace {

void push(MatchedSamples& m, const DatedScore& s, double value) {
  m.meeting_ids.push_back(s.meeting_id);
  m.meeting_dates.push_back(s.date);
  m.scores.push_back(s.value);
  m.values.push_back(value);
}

void require_nonempty(std::span<const DatedScore> scores, std::size_t series_size) {
  if (scores.empty()) throw ValidationError("no scores to match");
  if (series_size == 0) throw ValidationError("reference series is empty");
}

}  // namespace

MatchedSamples match_macro(std::span<const DatedScore> scores, const MacroSeries& series) {
  require_nonempty(scores, series.observations.size());
  MatchedSamples m;
  const auto& obs = series.observations;
  for (const auto& s : scores) {
    auto it = std::upper_bound(obs.begin(), obs.end(), s.date,
                               [](const Date& d, const Observation& o) { return d < o.date; });
    if (it != obs.end()) push(m, s, it->value);
  }
  if (m.n() == 0) throw ValidationError("no meeting has a later " + series.indicator + " observation");
  return m;
}

MatchedSamples match_same_day(std::span<const DatedScore> scores, const MacroSeries& series) {
  require_nonempty(scores, series.observations.size());
  MatchedSamples m;
  const auto& obs = series.observations;
  for (const auto& s : scores) {
    auto it = std::lower_bound(obs.begin(), obs.end(), s.date,
                               [](const Observation& o, const Date& d) { return o.date < d; });
    if (it != obs.end() && it->date == s.date) push(m, s, it->value);
  }
  if (m.n() == 0) throw ValidationError("no meeting date appears in " + series.indicator);
  return m;
}

MatchedSamples match_by_id(std::span<const DatedScore> scores,
                           const std::map<std::string, double>& values) {
  require_nonempty(scores, values.size());
  MatchedSamples m;
  for (const auto& s : scores)
    if (auto it = values.find(s.meeting_id); it != values.end()) push(m, s, it->second);
  if (m.n() == 0) throw ValidationError("no meeting id appears in the reference values");
  return m;
}

MatchedSamples Reference::match(std::span<const DatedScore> scores) const {
  switch (rule) {
    case Rule::next_release: return match_macro(scores, series);
    case Rule::same_day: return match_same_day(scores, series);
    case Rule::by_id: return match_by_id(scores, keyed);
  }
  throw ValidationError("bad reference rule");
}

Reference Reference::load(const std::filesystem::path& path, std::string name) {
  const auto t = read_csv(path);
  Reference ref;
  ref.name = name;
  if (!t.header.empty() && t.header[0] == "meeting_id") {
    ref.rule = Rule::by_id;
    const auto vc = t.column("value");
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      if (!ref.keyed.emplace(t.rows[i][0], parse_number(t.rows[i][vc], t.line_numbers[i])).second)
        throw ConflictError("duplicate meeting_id '" + t.rows[i][0] + "' in " + path.string());
    return ref;
  }
  ref.rule = Rule::next_release;
  ref.series = load_macro_csv(path, std::move(name));
  return ref;
}

CorrelationSummary correlate(const MatchedSamples& samples) {
  CorrelationSummary c;
  c.n = samples.n();
  if (c.n < 3) return c;
  try {
    c.pearson = pearson(samples.scores, samples.values);
    c.spearman = spearman(samples.scores, samples.values);
  } catch (const ValidationError&) {
    c.pearson.reset();
    c.spearman.reset();
  }
  return c;
}

const std::vector<PeriodSplit>& default_periods() {
  static const std::vector<PeriodSplit> splits{
      {"P1", Date(2003, 1, 1), Date(2008, 12, 15)},
      {"P2", Date(2008, 12, 16), Date(2015, 12, 15)},
      {"P3", Date(2015, 12, 16), Date(2020, 3, 2)},
      {"P4", Date(2020, 3, 3), Date(2025, 12, 31)},
  };
  return splits;
}

std::vector<PeriodRow> period_report(const MatchedSamples& samples,
                                     const std::vector<PeriodSplit>& splits) {
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (splits[i].end < splits[i].start)
      throw ValidationError("period " + splits[i].name + " ends before it starts");
    for (std::size_t j = 0; j < i; ++j)
      if (!(splits[i].end < splits[j].start || splits[j].end < splits[i].start))
        throw ValidationError("periods " + splits[j].name + " and " + splits[i].name + " overlap");
  }
  std::vector<PeriodRow> rows;
  for (const auto& split : splits) {
    MatchedSamples slice;
    for (std::size_t i = 0; i < samples.n(); ++i) {
      const auto& d = samples.meeting_dates[i];
      if (split.start <= d && d <= split.end) {
        slice.meeting_ids.push_back(samples.meeting_ids[i]);
        slice.meeting_dates.push_back(d);
        slice.scores.push_back(samples.scores[i]);
        slice.values.push_back(samples.values[i]);
      }
    }
    PeriodRow row{split, correlate(slice), false};
    row.sufficient = row.corr.spearman.has_value();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<PeriodRow> period_report(std::span<const DatedScore> scores, const Reference& reference,
                                     const std::vector<PeriodSplit>& splits) {
  return period_report(reference.match(scores), splits);
}

}  // namespace dcs
