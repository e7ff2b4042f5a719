#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "crowdcount/embedding.hpp"
#include "crowdcount/geometry.hpp"

namespace crowdcount {

using DetectionMap = std::map<std::string, std::vector<ScoredBox>>;

// Detection JSONL: {"image": "<id>", "boxes": [{"x","y","w","h","score"}]}.
// Lines for the same image are concatenated; blank lines are skipped.
// Schema violations throw ParseError with the line number.
DetectionMap load_detections(std::istream& in);
DetectionMap load_detections(const std::filesystem::path& path);
void write_detections(std::ostream& out, const DetectionMap& detections);

// Embedding JSONL: {"frame": <int>, "face_id": "<id>", "box": {...}, "vec": [128]}.
// An optional "label" string carries the annotated identity.
std::vector<FaceInstance> load_embeddings(std::istream& in);
std::vector<FaceInstance> load_embeddings(const std::filesystem::path& path);
void write_embeddings(std::ostream& out, const std::vector<FaceInstance>& faces);

}  // namespace crowdcount
