#include "amod/data.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace amod {
namespace {

constexpr double kMetersPerDegreeLat = 110540.0;
constexpr double kMetersPerDegreeLonEquator = 111320.0;

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, delim)) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used > 0 && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

struct DateTime {
  CivilDate date;
  int hour = 0;
  int minute = 0;
};

bool parse_datetime(const std::string& text, DateTime& out) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s) < 6) return false;
  if (sep != ' ' && sep != 'T') return false;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59) return false;
  out.date = {y, mo, d};
  out.hour = h;
  out.minute = mi;
  return true;
}

}  // namespace

PlanarPoint project(const GeoAnchor& anchor, double lat, double lon) {
  const double east = (lon - anchor.lon) * kMetersPerDegreeLonEquator *
                      std::cos(anchor.lat * std::numbers::pi / 180.0);
  const double north = (lat - anchor.lat) * kMetersPerDegreeLat;
  const double theta = -anchor.rotation_deg * std::numbers::pi / 180.0;
  const double x = east * std::cos(theta) - north * std::sin(theta);
  const double y = east * std::sin(theta) + north * std::cos(theta);
  // Grid rows grow southward.
  return {x, -y};
}

CivilDate parse_date(const std::string& text) {
  CivilDate d;
  char a = 0, b = 0;
  std::istringstream in(text);
  if (!(in >> d.year >> a >> d.month >> b >> d.day) || a != '-' || b != '-' || d.month < 1 ||
      d.month > 12 || d.day < 1 || d.day > 31)
    throw std::invalid_argument("bad date '" + text + "' (expected YYYY-MM-DD)");
  return d;
}

std::string format_date(const CivilDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

bool is_weekend(const CivilDate& d) {
  using namespace std::chrono;
  const year_month_day ymd{year{d.year}, month{static_cast<unsigned>(d.month)},
                           day{static_cast<unsigned>(d.day)}};
  const weekday wd{sys_days{ymd}};
  return wd == Saturday || wd == Sunday;
}

std::vector<std::string> default_holidays_2015() {
  return {"2015-01-01", "2015-01-19", "2015-02-16", "2015-05-25", "2015-07-03",
          "2015-09-07", "2015-10-12", "2015-11-11", "2015-11-26", "2015-12-25"};
}

IngestReport ingest_trips(std::istream& table, const ZoneGrid& grid, const IngestOptions& options) {
  if (options.subsample_every < 1) throw std::invalid_argument("subsample_every must be >= 1");
  const CivilDate want = parse_date(options.date);
  IngestReport report;
  auto& stream = report.stream;
  stream.meta.source = StreamSource::historical;
  stream.meta.date_label = format_date(want) + "T" + (options.hour < 10 ? "0" : "") +
                           std::to_string(options.hour);
  stream.meta.episode_length = options.episode_length;
  stream.meta.n_zones = static_cast<int>(grid.size());

  const bool excluded_day =
      is_weekend(want) || std::find(options.holidays.begin(), options.holidays.end(),
                                    format_date(want)) != options.holidays.end();
  if (excluded_day) report.warnings.push_back(format_date(want) + " is a weekend or holiday");

  std::string header;
  if (!std::getline(table, header)) {
    report.warnings.push_back("empty trip table");
    return report;
  }
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  const auto columns = split(header, delim);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < columns.size(); ++i) col[columns[i]] = i;
  const char* required[] = {"pickup_datetime", "pickup_latitude", "pickup_longitude",
                            "dropoff_latitude", "dropoff_longitude"};
  for (const char* name : required)
    if (!col.count(name)) throw std::invalid_argument(std::string("trip table lacks column ") + name);

  std::size_t in_area = 0;
  std::string line;
  while (std::getline(table, line)) {
    if (line.empty() || line == "\r") continue;
    ++report.rows;
    const auto cells = split(line, delim);
    auto cell = [&](const char* name) -> const std::string* {
      const std::size_t i = col.at(name);
      return i < cells.size() ? &cells[i] : nullptr;
    };
    TripRecord rec;
    DateTime when;
    const std::string* dt = cell("pickup_datetime");
    const std::string* plat = cell("pickup_latitude");
    const std::string* plon = cell("pickup_longitude");
    const std::string* dlat = cell("dropoff_latitude");
    const std::string* dlon = cell("dropoff_longitude");
    if (!dt || !plat || !plon || !dlat || !dlon || !parse_datetime(*dt, when) ||
        !parse_double(*plat, rec.pickup_lat) || !parse_double(*plon, rec.pickup_lon) ||
        !parse_double(*dlat, rec.dropoff_lat) || !parse_double(*dlon, rec.dropoff_lon)) {
      ++report.unparseable;
      continue;
    }
    const int minute_offset = when.minute;
    if (excluded_day || !(when.date == want) || when.hour != options.hour ||
        minute_offset >= options.episode_length) {
      ++report.outside_window;
      continue;
    }
    const ZoneId origin = grid.locate(project(options.anchor, rec.pickup_lat, rec.pickup_lon));
    const ZoneId dest = grid.locate(project(options.anchor, rec.dropoff_lat, rec.dropoff_lon));
    if (origin < 0 || dest < 0) {
      ++report.outside_area;
      continue;
    }
    if (origin == dest) {
      ++report.intra_zone;
      continue;
    }
    if (in_area++ % static_cast<std::size_t>(options.subsample_every) != 0) {
      ++report.subsampled_out;
      continue;
    }
    stream.requests.push_back({minute_offset, origin, dest});
  }
  normalize_stream(stream);
  if (stream.requests.empty()) report.warnings.push_back("no requests in the selected window");
  return report;
}

RequestStream synth_stream(const ZoneGrid& grid, const SynthSpec& spec, std::uint64_t seed) {
  const std::size_t n = grid.size();
  if (spec.rate_per_step.size() != n)
    throw std::invalid_argument("rate_per_step needs one entry per zone");
  for (double r : spec.rate_per_step)
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("arrival rates must be >= 0");
  if (!spec.destination_weights.empty() && spec.destination_weights.size() != n)
    throw std::invalid_argument("destination_weights must be zones x zones");
  if (n < 2) throw std::invalid_argument("synthetic demand needs at least two zones");

  std::vector<std::discrete_distribution<int>> dest_dist;
  for (std::size_t o = 0; o < n; ++o) {
    std::vector<double> w(n, 1.0);
    if (!spec.destination_weights.empty()) {
      if (spec.destination_weights[o].size() != n)
        throw std::invalid_argument("destination_weights must be zones x zones");
      w = spec.destination_weights[o];
    }
    w[o] = 0.0;
    double total = 0.0;
    for (double x : w) {
      if (!(x >= 0.0)) throw std::invalid_argument("destination weights must be >= 0");
      total += x;
    }
    if (total <= 0.0) {
      w.assign(n, 1.0);
      w[o] = 0.0;
    }
    dest_dist.emplace_back(w.begin(), w.end());
  }

  RequestStream stream;
  stream.meta.source = StreamSource::synthetic;
  stream.meta.date_label = spec.date_label;
  stream.meta.seed = seed;
  stream.meta.episode_length = spec.episode_length;
  stream.meta.n_zones = static_cast<int>(n);

  std::mt19937_64 rng(seed);
  for (int step = 0; step < spec.episode_length; ++step) {
    for (std::size_t o = 0; o < n; ++o) {
      const double rate = spec.rate_per_step[o];
      if (rate <= 0.0) continue;
      std::poisson_distribution<int> arrivals(rate);
      const int count = arrivals(rng);
      for (int k = 0; k < count; ++k)
        stream.requests.push_back({step, static_cast<ZoneId>(o), dest_dist[o](rng)});
    }
  }
  normalize_stream(stream);
  return stream;
}

}  // namespace amod
