#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "sam3d/bev_raster.hpp"
#include "sam3d/prompt_grid.hpp"

namespace sam3d {

// Row-major binary image.
struct Bitmap {
  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> bits;

  Bitmap() = default;
  Bitmap(int height, int width) : h(height), w(width), bits(static_cast<std::size_t>(height) * width, 0) {}

  bool at(int r, int c) const { return bits[static_cast<std::size_t>(r) * w + c] != 0; }
  void set(int r, int c, bool v = true) { bits[static_cast<std::size_t>(r) * w + c] = v ? 1 : 0; }

  friend bool operator==(const Bitmap&, const Bitmap&) = default;
};

// Run lengths alternating background/foreground, starting with background.
using RunLengths = std::vector<std::uint32_t>;

RunLengths rle_encode(const Bitmap& bitmap);
// Counts come in signed so wire data with negative entries can be rejected.
Bitmap rle_decode(const std::vector<std::int64_t>& counts, int h, int w);
Bitmap rle_decode(const RunLengths& counts, int h, int w);

struct Mask {
  int h = 0;
  int w = 0;
  RunLengths rle;
  double score = 0.0;
  int prompt_index = -1;

  static Mask from_bitmap(const Bitmap& b, double score, int prompt_index);
  Bitmap decode() const { return rle_decode(rle, h, w); }
  std::uint64_t area() const;
  bool empty() const { return area() == 0; }

  friend bool operator==(const Mask&, const Mask&) = default;
};

void validate_mask(const Mask& m);
double mask_iou(const Mask& a, const Mask& b);

nlohmann::json mask_to_json(const Mask& m);
Mask mask_from_json(const nlohmann::json& j);

struct SegmentationRequest {
  const BevImage& image;
  const PromptSet& prompts;
  bool multimask = true;
};

enum class SegmenterKind { kOracle, kExternal };

class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual SegmenterKind kind() const = 0;
  // Raw segmenter output; segment() validates and post-processes it.
  virtual std::vector<Mask> run(const SegmentationRequest& req) = 0;
};

using SegmenterHandle = std::shared_ptr<Segmenter>;

/// Keeps the highest-score mask per prompt_index; ties go to the earliest
/// mask. Survivors keep their relative order.
std::vector<Mask> select_best_per_prompt(const std::vector<Mask>& masks);

/// Greedy IoU suppression: visits masks by descending score and drops any
/// mask overlapping an already kept one at IoU >= iou_thr. Survivors keep
/// their original order.
std::vector<Mask> dedup_masks(const std::vector<Mask>& masks, double iou_thr);

/// Runs the segmenter, rejects masks whose size differs from the image,
/// keeps the best mask per prompt and discards empty ones.
std::vector<Mask> segment(Segmenter& seg, const SegmentationRequest& req);

struct ExternalOptions {
  std::filesystem::path endpoint;
  std::chrono::milliseconds timeout{120'000};
  std::chrono::milliseconds poll{100};
};

/// Client side of the file-exchange protocol. Each call creates a fresh
/// request directory under the endpoint holding bev.png and request.json
/// and then waits for the adapter to rename response.json into place.
/// Calls on one instance are serialized.
class ExternalSegmenter final : public Segmenter {
 public:
  explicit ExternalSegmenter(ExternalOptions opts);

  SegmenterKind kind() const override { return SegmenterKind::kExternal; }
  std::vector<Mask> run(const SegmentationRequest& req) override;

  const std::filesystem::path& last_request_dir() const { return last_dir_; }

 private:
  ExternalOptions opts_;
  std::string session_;
  std::uint64_t counter_ = 0;
  std::filesystem::path last_dir_;
  std::mutex mu_;
};

nlohmann::json request_to_json(const PromptSet& prompts, const std::string& image_name, bool multimask);
// Parses response.json; {"error": ...} maps to SegmenterUnavailable.
std::vector<Mask> parse_response(const nlohmann::json& j);

// Write to a temp sibling then rename into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace sam3d
