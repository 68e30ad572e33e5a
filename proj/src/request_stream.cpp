#include "amod/request_stream.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace amod {
namespace {

constexpr const char* kMagic = "# amod-request-stream v1";

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::pair<std::size_t, std::size_t> RequestStream::placed_at(int step) const {
  auto lo = std::lower_bound(requests.begin(), requests.end(), step,
                             [](const StreamRequest& r, int s) { return r.placement_step < s; });
  auto hi = std::upper_bound(requests.begin(), requests.end(), step,
                             [](int s, const StreamRequest& r) { return s < r.placement_step; });
  return {static_cast<std::size_t>(lo - requests.begin()),
          static_cast<std::size_t>(hi - requests.begin())};
}

std::string to_string(StreamSource source) {
  return source == StreamSource::historical ? "historical" : "synthetic";
}

StreamSource parse_stream_source(const std::string& name) {
  if (name == "historical") return StreamSource::historical;
  if (name == "synthetic") return StreamSource::synthetic;
  throw std::invalid_argument("unknown stream source '" + name + "'");
}

int max_requests_per_step(const RequestStream& stream) {
  int best = 0;
  std::size_t i = 0;
  while (i < stream.requests.size()) {
    std::size_t j = i;
    while (j < stream.requests.size() &&
           stream.requests[j].placement_step == stream.requests[i].placement_step)
      ++j;
    best = std::max(best, static_cast<int>(j - i));
    i = j;
  }
  return best;
}

void normalize_stream(RequestStream& stream) {
  std::stable_sort(stream.requests.begin(), stream.requests.end(),
                   [](const StreamRequest& a, const StreamRequest& b) {
                     return a.placement_step < b.placement_step;
                   });
  stream.meta.max_requests_per_step = max_requests_per_step(stream);
}

std::vector<std::string> validate_stream(const RequestStream& stream, int cap) {
  std::vector<std::string> issues;
  const int n_zones = stream.meta.n_zones;
  for (std::size_t i = 0; i < stream.requests.size(); ++i) {
    const auto& r = stream.requests[i];
    std::ostringstream where;
    where << "request " << i << ": ";
    if (r.placement_step < 0 || r.placement_step >= stream.meta.episode_length)
      issues.push_back(where.str() + "placement step out of range");
    if (r.origin < 0 || r.destination < 0 || (n_zones > 0 && (r.origin >= n_zones || r.destination >= n_zones)))
      issues.push_back(where.str() + "zone out of range");
    if (r.origin == r.destination) issues.push_back(where.str() + "intra-zone request");
    if (i > 0 && stream.requests[i - 1].placement_step > r.placement_step)
      issues.push_back(where.str() + "not ordered by placement step");
  }
  if (cap > 0) {
    const int peak = max_requests_per_step(stream);
    if (peak > cap)
      issues.push_back("per-step request count " + std::to_string(peak) + " exceeds cap " +
                       std::to_string(cap));
  }
  return issues;
}

void write_stream(std::ostream& out, const RequestStream& stream) {
  out << kMagic << '\n';
  out << "# source: " << to_string(stream.meta.source) << '\n';
  out << "# date: " << stream.meta.date_label << '\n';
  out << "# seed: " << stream.meta.seed << '\n';
  out << "# episode_length: " << stream.meta.episode_length << '\n';
  out << "# n_zones: " << stream.meta.n_zones << '\n';
  out << "# max_requests_per_step: " << stream.meta.max_requests_per_step << '\n';
  out << "placement_step,origin,destination\n";
  for (const auto& r : stream.requests)
    out << r.placement_step << ',' << r.origin << ',' << r.destination << '\n';
}

RequestStream read_stream(std::istream& in) {
  RequestStream stream;
  std::string line;
  if (!std::getline(in, line) || trim(line) != kMagic)
    throw std::runtime_error("not a request stream file (missing header)");
  bool seen_columns = false;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = trim(line.substr(1, colon - 1));
      const std::string value = trim(line.substr(colon + 1));
      if (key == "source") stream.meta.source = parse_stream_source(value);
      else if (key == "date") stream.meta.date_label = value;
      else if (key == "seed") stream.meta.seed = std::stoull(value);
      else if (key == "episode_length") stream.meta.episode_length = std::stoi(value);
      else if (key == "n_zones") stream.meta.n_zones = std::stoi(value);
      else if (key == "max_requests_per_step") stream.meta.max_requests_per_step = std::stoi(value);
      continue;
    }
    if (!seen_columns) {
      if (line != "placement_step,origin,destination")
        throw std::runtime_error("request stream: unexpected column header at line " +
                                 std::to_string(line_no));
      seen_columns = true;
      continue;
    }
    StreamRequest r;
    char c1 = 0, c2 = 0;
    std::istringstream row(line);
    if (!(row >> r.placement_step >> c1 >> r.origin >> c2 >> r.destination) || c1 != ',' || c2 != ',')
      throw std::runtime_error("request stream: malformed row at line " + std::to_string(line_no));
    stream.requests.push_back(r);
  }
  return stream;
}

void save_stream(const std::filesystem::path& path, const RequestStream& stream) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_stream(out, stream);
}

RequestStream load_stream(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_stream(in);
}

}  // namespace amod
