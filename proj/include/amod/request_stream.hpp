#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "amod/grid.hpp"

namespace amod {

struct StreamRequest {
  int placement_step = 0;
  ZoneId origin = 0;
  ZoneId destination = 0;

  friend bool operator==(const StreamRequest&, const StreamRequest&) = default;
};

enum class StreamSource { historical, synthetic };

struct StreamMetadata {
  StreamSource source = StreamSource::synthetic;
  std::string date_label;
  std::uint64_t seed = 0;
  int episode_length = 60;
  int n_zones = 0;
  int max_requests_per_step = 0;

  friend bool operator==(const StreamMetadata&, const StreamMetadata&) = default;
};

/// Requests of one episode ordered by placement step. A request's id within
/// an episode is its index in `requests`.
struct RequestStream {
  StreamMetadata meta;
  std::vector<StreamRequest> requests;

  /// Index range [first, last) of requests placed at `step`.
  std::pair<std::size_t, std::size_t> placed_at(int step) const;

  friend bool operator==(const RequestStream&, const RequestStream&) = default;
};

std::string to_string(StreamSource source);
StreamSource parse_stream_source(const std::string& name);

int max_requests_per_step(const RequestStream& stream);

/// Sorts by placement step (stable) and refreshes the per-step maximum.
void normalize_stream(RequestStream& stream);

/// Problems found in a stream: out-of-range steps or zones, intra-zone
/// requests, unsorted order, and per-step counts above `cap` (cap <= 0 skips
/// that check).
std::vector<std::string> validate_stream(const RequestStream& stream, int cap);

void write_stream(std::ostream& out, const RequestStream& stream);
RequestStream read_stream(std::istream& in);
void save_stream(const std::filesystem::path& path, const RequestStream& stream);
RequestStream load_stream(const std::filesystem::path& path);

}  // namespace amod
