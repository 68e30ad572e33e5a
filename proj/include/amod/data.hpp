#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "amod/grid.hpp"
#include "amod/request_stream.hpp"

namespace amod {

struct TripRecord {
  std::string pickup_datetime;
  double pickup_lat = 0.0;
  double pickup_lon = 0.0;
  double dropoff_lat = 0.0;
  double dropoff_lon = 0.0;
};

/// Where the zone grid sits on the map. The planar frame is an
/// equirectangular projection around (lat, lon), rotated so grid rows follow
/// the street grid.
struct GeoAnchor {
  double lat = 40.7549;
  double lon = -73.9840;
  double rotation_deg = 29.0;
};

PlanarPoint project(const GeoAnchor& anchor, double lat, double lon);

struct CivilDate {
  int year = 0;
  int month = 0;
  int day = 0;

  friend bool operator==(const CivilDate&, const CivilDate&) = default;
};

CivilDate parse_date(const std::string& text);
std::string format_date(const CivilDate& d);
bool is_weekend(const CivilDate& d);

/// US federal holidays observed in 2015.
std::vector<std::string> default_holidays_2015();

struct IngestOptions {
  std::string date;  // YYYY-MM-DD
  int hour = 0;
  /// Keep every k-th in-area record (1 keeps all).
  int subsample_every = 1;
  std::vector<std::string> holidays = default_holidays_2015();
  GeoAnchor anchor;
  int episode_length = 60;
};

struct IngestReport {
  RequestStream stream;
  std::size_t rows = 0;
  std::size_t unparseable = 0;
  std::size_t outside_window = 0;
  std::size_t outside_area = 0;
  std::size_t intra_zone = 0;
  std::size_t subsampled_out = 0;
  std::vector<std::string> warnings;
};

/// Reads a delimited trip table with the columns pickup_datetime,
/// pickup_latitude, pickup_longitude, dropoff_latitude, dropoff_longitude
/// (any order, extra columns ignored). Records of the requested hour are
/// mapped to zones; records outside the grid, intra-zone trips and
/// weekend/holiday dates are dropped. Unparseable rows are counted, never
/// fatal.
IngestReport ingest_trips(std::istream& table, const ZoneGrid& grid, const IngestOptions& options);

struct SynthSpec {
  /// Mean arrivals per step, indexed by origin zone.
  std::vector<double> rate_per_step;
  /// Optional origin-conditioned destination weights (zones x zones). Empty
  /// means uniform over the non-origin zones.
  std::vector<std::vector<double>> destination_weights;
  int episode_length = 60;
  std::string date_label = "synthetic";
};

/// Independent Poisson arrivals per origin zone and step.
RequestStream synth_stream(const ZoneGrid& grid, const SynthSpec& spec, std::uint64_t seed);

}  // namespace amod
