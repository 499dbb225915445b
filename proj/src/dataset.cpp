// SPDX-License-Identifier: Apache-2.0
#include "thermask/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "thermask/image.hpp"
#include "thermask/rng.hpp"

namespace thermask::dataset {

namespace fs = std::filesystem;
using json = nlohmann::json;

const ImageRecord* DatasetManifest::find_record(const std::string& image_id) const {
  for (const auto& r : records)
    if (r.image_id == image_id) return &r;
  return nullptr;
}

std::vector<const Annotation*> DatasetManifest::annotations_for(
    const std::string& image_id) const {
  std::vector<const Annotation*> out;
  for (const auto& a : annotations)
    if (a.image_id == image_id) out.push_back(&a);
  return out;
}

std::vector<std::string> DatasetManifest::ids_in(Split s) const {
  std::vector<std::string> out;
  for (const auto& r : records) {
    auto it = split.find(r.image_id);
    if (it != split.end() && it->second == s) out.push_back(r.image_id);
  }
  return out;
}

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

DatasetManifest load_labels(const fs::path& label_dir, const fs::path& image_dir,
                            bool mask_only) {
  if (!fs::is_directory(image_dir))
    throw std::invalid_argument("load_labels: not a directory: " + image_dir.string());
  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(image_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pgm")
      images.push_back(entry.path());
  std::sort(images.begin(), images.end());

  DatasetManifest manifest;
  for (const auto& img_path : images) {
    const GrayImage img = read_pgm(img_path);
    ImageRecord rec;
    rec.image_id = img_path.stem().string();
    rec.path = img_path.string();
    rec.width = img.width;
    rec.height = img.height;
    rec.bit_depth = img.bit_depth();
    rec.camera = "unknown";
    manifest.records.push_back(rec);
    manifest.split[rec.image_id] = Split::TRAIN;

    const fs::path label_path = label_dir / (img_path.stem().string() + ".txt");
    if (!fs::exists(label_path)) continue;  // record with zero annotations
    std::ifstream in(label_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      std::istringstream ss(line);
      int cls = 0;
      double cx = 0, cy = 0, w = 0, h = 0;
      if (!(ss >> cls >> cx >> cy >> w >> h))
        throw std::runtime_error(label_path.string() + ":" + std::to_string(line_no) +
                                 ": expected 'class cx cy w h'");
      for (double v : {cx, cy, w, h})
        if (v < 0.0 || v > 1.0)
          throw std::runtime_error(label_path.string() + ":" + std::to_string(line_no) +
                                   ": normalized value outside [0,1]");
      Annotation anno;
      anno.image_id = rec.image_id;
      anno.label = mask_only ? ClassLabel{} : ClassLabel{mask_class_from_index(cls)};
      const BoundingBox raw{(cx - w / 2) * img.width, (cy - h / 2) * img.height,
                            (cx + w / 2) * img.width, (cy + h / 2) * img.height};
      anno.box = raw.clamped(img.width, img.height);
      manifest.annotations.push_back(anno);
    }
  }
  return manifest;
}

void save_labels(const DatasetManifest& manifest, const fs::path& label_dir) {
  fs::create_directories(label_dir);
  for (const auto& rec : manifest.records) {
    std::ofstream out(label_dir / (rec.image_id + ".txt"), std::ios::trunc);
    if (!out) throw std::runtime_error("save_labels: cannot write to " + label_dir.string());
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const auto& anno : manifest.annotations) {
      if (anno.image_id != rec.image_id) continue;
      const int cls = anno.label ? static_cast<int>(*anno.label) : 0;
      out << cls << " " << anno.box.center_x() / rec.width << " "
          << anno.box.center_y() / rec.height << " " << anno.box.width() / rec.width << " "
          << anno.box.height() / rec.height << "\n";
    }
  }
}

DatasetManifest split_by_ratio(const DatasetManifest& manifest, double train_fraction,
                               uint64_t seed) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw std::invalid_argument("split_by_ratio: train_fraction must be in (0,1)");
  std::map<std::string, std::vector<std::string>> groups;  // camera -> ids
  for (const auto& rec : manifest.records) groups[rec.camera].push_back(rec.image_id);

  DatasetManifest out = manifest;
  out.split.clear();
  out.split_kind = SplitKind::RATIO;
  Rng root(seed);
  for (auto& [camera, ids] : groups) {
    if (ids.size() < 2)
      throw std::invalid_argument("split_by_ratio: camera group '" + camera +
                                  "' has fewer than 2 images, cannot stratify");
    Rng rng = root.derive(fnv1a(camera));
    rng.shuffle(ids);
    const auto n = static_cast<long>(ids.size());
    long n_train = std::lround(train_fraction * n);
    n_train = std::clamp(n_train, 1L, n - 1);
    for (long i = 0; i < n; ++i)
      out.split[ids[i]] = i < n_train ? Split::TRAIN : Split::TEST;
  }
  return out;
}

DatasetManifest split_by_subject(const DatasetManifest& manifest,
                                 const std::set<std::string>& test_subjects) {
  std::set<std::string> all;
  for (const auto& rec : manifest.records) {
    if (!rec.subject_id)
      throw std::invalid_argument("split_by_subject: record '" + rec.image_id +
                                  "' has no subject id");
    all.insert(*rec.subject_id);
  }
  if (test_subjects.empty())
    throw std::invalid_argument("split_by_subject: empty test subject set");
  for (const auto& s : test_subjects)
    if (!all.count(s)) throw std::invalid_argument("split_by_subject: unknown subject '" + s + "'");
  if (test_subjects.size() >= all.size())
    throw std::invalid_argument("split_by_subject: test subjects must be a proper subset");

  DatasetManifest out = manifest;
  out.split.clear();
  out.split_kind = SplitKind::SUBJECT;
  for (const auto& rec : manifest.records)
    out.split[rec.image_id] =
        test_subjects.count(*rec.subject_id) ? Split::TEST : Split::TRAIN;
  return out;
}

std::vector<Violation> validate(const DatasetManifest& manifest) {
  std::vector<Violation> out;
  std::map<std::string, const ImageRecord*> by_id;
  for (const auto& rec : manifest.records) by_id[rec.image_id] = &rec;

  for (const auto& anno : manifest.annotations) {
    auto it = by_id.find(anno.image_id);
    if (it == by_id.end()) {
      out.push_back({"dangling_image_id", anno.image_id, "annotation references no record"});
      continue;
    }
    if (!anno.box.valid())
      out.push_back({"empty_box", anno.image_id, "box has non-positive area"});
    else if (anno.box.x_max <= 0 || anno.box.y_max <= 0 ||
             anno.box.x_min >= it->second->width || anno.box.y_min >= it->second->height)
      out.push_back({"box_outside_image", anno.image_id, "box fully outside image bounds"});
  }

  for (const auto& rec : manifest.records)
    if (!manifest.split.count(rec.image_id))
      out.push_back({"missing_split", rec.image_id, "record not covered by split"});
  for (const auto& [id, s] : manifest.split)
    if (!by_id.count(id))
      out.push_back({"unknown_split_id", id, "split entry references no record"});

  // Subject leaks, only meaningful for subject-disjoint splits.
  std::map<std::string, std::pair<bool, bool>> seen;  // subject -> (in train, in test)
  for (const auto& rec : manifest.records) {
    if (manifest.split_kind != SplitKind::SUBJECT || !rec.subject_id) continue;
    auto it = manifest.split.find(rec.image_id);
    if (it == manifest.split.end()) continue;
    auto& flags = seen[*rec.subject_id];
    (it->second == Split::TRAIN ? flags.first : flags.second) = true;
  }
  for (const auto& [subject, flags] : seen)
    if (flags.first && flags.second)
      out.push_back({"subject_split_leak", "", "subject '" + subject + "' in both splits"});
  return out;
}

namespace {

json box_to_json(const BoundingBox& b) {
  return json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

BoundingBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::runtime_error("manifest: bad box");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

std::string manifest_to_json(const DatasetManifest& manifest) {
  json records = json::array();
  for (const auto& r : manifest.records) {
    json rec{{"image_id", r.image_id}, {"path", r.path},       {"width", r.width},
             {"height", r.height},     {"bit_depth", r.bit_depth}, {"camera", r.camera}};
    if (r.subject_id) rec["subject_id"] = *r.subject_id;
    if (r.face_box) rec["face_box"] = box_to_json(*r.face_box);
    records.push_back(rec);
  }
  json annotations = json::array();
  for (const auto& a : manifest.annotations)
    annotations.push_back(json{{"image_id", a.image_id},
                               {"class", to_string(a.label)},
                               {"box", box_to_json(a.box)}});
  json split = json::object();
  for (const auto& [id, s] : manifest.split) split[id] = to_string(s);
  json doc{{"schema", "v1"},
           {"records", records},
           {"annotations", annotations},
           {"split", split},
           {"split_kind", manifest.split_kind == SplitKind::SUBJECT ? "SUBJECT" : "RATIO"}};
  return doc.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.value("schema", "") != "v1")
    throw std::runtime_error("manifest: unsupported schema version");
  DatasetManifest manifest;
  for (const auto& rec : doc.at("records")) {
    ImageRecord r;
    r.image_id = rec.at("image_id").get<std::string>();
    r.path = rec.at("path").get<std::string>();
    r.width = rec.at("width").get<int>();
    r.height = rec.at("height").get<int>();
    r.bit_depth = rec.at("bit_depth").get<int>();
    r.camera = rec.at("camera").get<std::string>();
    if (rec.contains("subject_id")) r.subject_id = rec["subject_id"].get<std::string>();
    if (rec.contains("face_box")) r.face_box = box_from_json(rec["face_box"]);
    manifest.records.push_back(std::move(r));
  }
  for (const auto& anno : doc.at("annotations")) {
    Annotation a;
    a.image_id = anno.at("image_id").get<std::string>();
    const auto cls = anno.at("class").get<std::string>();
    a.label = cls == "MASK" ? ClassLabel{} : ClassLabel{mask_class_from_string(cls)};
    a.box = box_from_json(anno.at("box"));
    manifest.annotations.push_back(std::move(a));
  }
  for (const auto& [id, s] : doc.at("split").items())
    manifest.split[id] = s.get<std::string>() == "TRAIN" ? Split::TRAIN : Split::TEST;
  if (doc.value("split_kind", "RATIO") == "SUBJECT")
    manifest.split_kind = SplitKind::SUBJECT;
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  const std::string text = manifest_to_json(manifest);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return manifest_from_json(ss.str());
}

}  // namespace thermask::dataset
