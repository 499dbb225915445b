// SPDX-License-Identifier: Apache-2.0
//
// Data model, label-file I/O, dataset splitting, and manifest validation
// for masked-face image datasets.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "thermask/box.hpp"

namespace thermask::dataset {

enum class Split { TRAIN, TEST };

inline const char* to_string(Split s) { return s == Split::TRAIN ? "TRAIN" : "TEST"; }

/// One labeled mask region. Several annotations may share an image.
struct Annotation {
  std::string image_id;
  ClassLabel label;  // mask type, or nullopt for the single detection class
  BoundingBox box;   // pixel corners
};

struct ImageRecord {
  std::string image_id;
  std::string path;  // relative to the manifest location
  int width = 0;
  int height = 0;
  int bit_depth = 8;  // one of {8, 14, 16}
  std::string camera;
  std::optional<std::string> subject_id;
  /// Ground-truth face region, when known (synthetic data carries it; it
  /// stands in for an external face extractor).
  std::optional<BoundingBox> face_box;
};

/// How the split map was produced; subject-disjointness is only enforced
/// (by validate) for subject splits.
enum class SplitKind { RATIO, SUBJECT };

struct DatasetManifest {
  std::vector<ImageRecord> records;
  std::vector<Annotation> annotations;
  std::map<std::string, Split> split;
  SplitKind split_kind = SplitKind::RATIO;

  const ImageRecord* find_record(const std::string& image_id) const;
  std::vector<const Annotation*> annotations_for(const std::string& image_id) const;
  std::vector<std::string> ids_in(Split s) const;  // record order
};

/// Reads a YOLO-convention dataset: every *.pgm under image_dir, with a
/// sibling "<stem>.txt" under label_dir holding lines
/// "class_index cx cy w h" normalized to [0,1]. A missing label file yields
/// a record with zero annotations; a value outside [0,1] is a parse error
/// naming the file and line. Boxes are converted to pixel corners and
/// clamped to the image frame.
///
/// `mask_only` maps every class index to the single detection label.
DatasetManifest load_labels(const std::filesystem::path& label_dir,
                            const std::filesystem::path& image_dir,
                            bool mask_only = false);

/// Writes YOLO label files (one per record, 6-decimal normalized values).
void save_labels(const DatasetManifest& manifest, const std::filesystem::path& label_dir);

/// Deterministic per-camera stratified split: every camera group contributes
/// to both subsets. Throws if any camera group has fewer than 2 images.
DatasetManifest split_by_ratio(const DatasetManifest& manifest, double train_fraction,
                               uint64_t seed);

/// Subject-disjoint split: images of `test_subjects` go to TEST, the rest to
/// TRAIN. Requires subject ids on every record and a proper nonempty subset.
DatasetManifest split_by_subject(const DatasetManifest& manifest,
                                 const std::set<std::string>& test_subjects);

struct Violation {
  std::string kind;  // e.g. "empty_box", "box_outside_image", "dangling_image_id"
  std::string image_id;
  std::string detail;
};

/// Machine-checkable consistency: non-positive-area boxes, boxes fully
/// outside image bounds, dangling annotation ids, split coverage gaps,
/// and subjects leaking across splits. Violations are data, not errors.
std::vector<Violation> validate(const DatasetManifest& manifest);

// Manifest JSON document (schema "v1").
std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace thermask::dataset
