#include "sam3d/segmenter.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <utility>

#include "sam3d/error.hpp"

namespace sam3d {

namespace fs = std::filesystem;

namespace {

template <typename Count>
Bitmap decode_counts(const std::vector<Count>& counts, int h, int w) {
  if (h < 0 || w < 0) throw Error(ErrorKind::kBadArgs, "negative mask dimensions");
  const std::uint64_t total = static_cast<std::uint64_t>(h) * static_cast<std::uint64_t>(w);
  std::uint64_t sum = 0;
  for (Count c : counts) {
    if (c < 0) throw Error(ErrorKind::kNegativeCount, "negative run length");
    sum += static_cast<std::uint64_t>(c);
  }
  if (sum != total) {
    throw Error(ErrorKind::kLengthMismatch,
                "run lengths sum to " + std::to_string(sum) + ", expected " + std::to_string(total));
  }
  Bitmap b(h, w);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const auto n = static_cast<std::size_t>(counts[k]);
    if (k % 2 == 1) std::fill_n(b.bits.begin() + static_cast<std::ptrdiff_t>(pos), n, std::uint8_t{1});
    pos += n;
  }
  return b;
}

// Foreground runs as half-open [begin, end) intervals over the flat index.
std::vector<std::pair<std::uint64_t, std::uint64_t>> foreground_runs(const RunLengths& rle) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> runs;
  std::uint64_t pos = 0;
  for (std::size_t k = 0; k < rle.size(); ++k) {
    if (k % 2 == 1 && rle[k] > 0) runs.emplace_back(pos, pos + rle[k]);
    pos += rle[k];
  }
  return runs;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kProtocolError, path.string() + ": " + e.what());
  }
}

}  // namespace

RunLengths rle_encode(const Bitmap& bitmap) {
  RunLengths counts;
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (std::uint8_t bit : bitmap.bits) {
    const std::uint8_t v = bit != 0 ? 1 : 0;
    if (v != current) {
      counts.push_back(run);
      current = v;
      run = 0;
    }
    ++run;
  }
  counts.push_back(run);
  return counts;
}

Bitmap rle_decode(const std::vector<std::int64_t>& counts, int h, int w) {
  return decode_counts(counts, h, w);
}

Bitmap rle_decode(const RunLengths& counts, int h, int w) { return decode_counts(counts, h, w); }

Mask Mask::from_bitmap(const Bitmap& b, double score, int prompt_index) {
  return Mask{b.h, b.w, rle_encode(b), score, prompt_index};
}

std::uint64_t Mask::area() const {
  std::uint64_t a = 0;
  for (std::size_t k = 1; k < rle.size(); k += 2) a += rle[k];
  return a;
}

void validate_mask(const Mask& m) {
  if (m.h < 1 || m.w < 1) throw Error(ErrorKind::kValueError, "mask dimensions must be positive");
  const std::uint64_t sum = std::accumulate(m.rle.begin(), m.rle.end(), std::uint64_t{0});
  if (sum != static_cast<std::uint64_t>(m.h) * static_cast<std::uint64_t>(m.w)) {
    throw Error(ErrorKind::kLengthMismatch, "mask run lengths do not cover h*w");
  }
  for (std::size_t k = 1; k < m.rle.size(); ++k) {
    if (m.rle[k] == 0) throw Error(ErrorKind::kValueError, "only the first run length may be zero");
  }
  if (!(m.score >= 0.0 && m.score <= 1.0)) throw Error(ErrorKind::kValueError, "mask score outside [0,1]");
}

double mask_iou(const Mask& a, const Mask& b) {
  if (a.h != b.h || a.w != b.w) return 0.0;
  const auto ra = foreground_runs(a.rle);
  const auto rb = foreground_runs(b.rle);
  std::uint64_t inter = 0;
  std::size_t i = 0, j = 0;
  while (i < ra.size() && j < rb.size()) {
    const std::uint64_t lo = std::max(ra[i].first, rb[j].first);
    const std::uint64_t hi = std::min(ra[i].second, rb[j].second);
    if (hi > lo) inter += hi - lo;
    if (ra[i].second < rb[j].second) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::uint64_t uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

nlohmann::json mask_to_json(const Mask& m) {
  return {{"size", {m.h, m.w}}, {"counts", m.rle}, {"score", m.score}, {"prompt_index", m.prompt_index}};
}

Mask mask_from_json(const nlohmann::json& j) {
  try {
    Mask m;
    const auto& size = j.at("size");
    if (!size.is_array() || size.size() != 2) throw Error(ErrorKind::kProtocolError, "mask size must be [h,w]");
    m.h = size.at(0).get<int>();
    m.w = size.at(1).get<int>();
    const auto counts = j.at("counts").get<std::vector<std::int64_t>>();
    rle_decode(counts, m.h, m.w);  // sum and sign checks
    for (auto c : counts) m.rle.push_back(static_cast<std::uint32_t>(c));
    m.score = j.at("score").get<double>();
    m.prompt_index = j.at("prompt_index").get<int>();
    validate_mask(m);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kProtocolError, std::string("malformed mask: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kProtocolError) throw;
    throw Error(ErrorKind::kProtocolError, std::string("invalid mask: ") + e.what());
  }
}

std::vector<Mask> select_best_per_prompt(const std::vector<Mask>& masks) {
  std::unordered_map<int, std::size_t> best;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    auto [it, inserted] = best.try_emplace(masks[i].prompt_index, i);
    if (!inserted && masks[i].score > masks[it->second].score) it->second = i;
  }
  std::vector<Mask> out;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (best.at(masks[i].prompt_index) == i) out.push_back(masks[i]);
  }
  return out;
}

std::vector<Mask> dedup_masks(const std::vector<Mask>& masks, double iou_thr) {
  std::vector<std::size_t> order(masks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return masks[a].score > masks[b].score; });
  std::vector<bool> keep(masks.size(), false);
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const bool dup = std::any_of(kept.begin(), kept.end(),
                                 [&](std::size_t k) { return mask_iou(masks[i], masks[k]) >= iou_thr; });
    if (!dup) {
      keep[i] = true;
      kept.push_back(i);
    }
  }
  std::vector<Mask> out;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (keep[i]) out.push_back(masks[i]);
  }
  return out;
}

std::vector<Mask> segment(Segmenter& seg, const SegmentationRequest& req) {
  std::vector<Mask> raw = seg.run(req);
  const int n_prompts = static_cast<int>(req.prompts.size());
  for (const Mask& m : raw) {
    if (m.h != req.image.height() || m.w != req.image.width()) {
      throw Error(ErrorKind::kProtocolError, "mask size differs from the request image");
    }
    if (m.prompt_index < 0 || m.prompt_index >= n_prompts) {
      throw Error(ErrorKind::kProtocolError, "mask prompt_index out of range");
    }
  }
  std::vector<Mask> best = select_best_per_prompt(raw);
  std::erase_if(best, [](const Mask& m) { return m.empty(); });
  return best;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIoFailure, "cannot write " + tmp.string());
    out << contents;
    if (!out) throw Error(ErrorKind::kIoFailure, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIoFailure, "rename to " + path.string() + ": " + ec.message());
}

nlohmann::json request_to_json(const PromptSet& prompts, const std::string& image_name, bool multimask) {
  nlohmann::json pts = nlohmann::json::array();
  for (const Prompt& p : prompts.prompts) pts.push_back({p.u, p.v});
  return {{"image", image_name}, {"prompts", pts}, {"multimask", multimask}};
}

std::vector<Mask> parse_response(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::kProtocolError, "response must be a JSON object");
  if (j.contains("error")) {
    throw Error(ErrorKind::kSegmenterUnavailable,
                "adapter reported: " + (j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump()));
  }
  if (!j.contains("masks") || !j["masks"].is_array()) {
    throw Error(ErrorKind::kProtocolError, "response lacks a \"masks\" array");
  }
  std::vector<Mask> masks;
  for (const auto& m : j["masks"]) masks.push_back(mask_from_json(m));
  return masks;
}

ExternalSegmenter::ExternalSegmenter(ExternalOptions opts) : opts_(std::move(opts)) {
  std::error_code ec;
  if (!fs::is_directory(opts_.endpoint, ec)) {
    throw Error(ErrorKind::kSegmenterUnavailable, "endpoint directory missing: " + opts_.endpoint.string());
  }
  if (opts_.poll.count() <= 0) throw Error(ErrorKind::kConfigError, "poll interval must be positive");
  std::random_device rd;
  std::ostringstream id;
  id << std::hex << rd() << rd();
  session_ = id.str();
}

std::vector<Mask> ExternalSegmenter::run(const SegmentationRequest& req) {
  std::lock_guard lock(mu_);
  char name[64];
  std::snprintf(name, sizeof(name), "req_%s_%06llu", session_.c_str(),
                static_cast<unsigned long long>(counter_++));
  const fs::path dir = opts_.endpoint / name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kSegmenterUnavailable, "cannot create " + dir.string() + ": " + ec.message());
  last_dir_ = dir;

  save_png(req.image, dir / "bev.png");
  write_file_atomic(dir / "request.json", request_to_json(req.prompts, "bev.png", req.multimask).dump());

  const fs::path response = dir / "response.json";
  const auto deadline = std::chrono::steady_clock::now() + opts_.timeout;
  while (!fs::exists(response, ec)) {
    if (std::chrono::steady_clock::now() >= deadline) {
      throw Error(ErrorKind::kTimeout, "no response in " + dir.string());
    }
    std::this_thread::sleep_for(opts_.poll);
  }
  return parse_response(read_json(response));
}

}  // namespace sam3d
