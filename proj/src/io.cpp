#include "sizedepth/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "sizedepth/error.hpp"

namespace sizedepth::io {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::schema, where + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) schema_error(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) schema_error(where, "expected an integer");
  return j.get<int>();
}

std::vector<double> numbers(const json& j, std::size_t expected, const std::string& where) {
  if (!j.is_array()) schema_error(where, "expected an array");
  if (expected != 0 && j.size() != expected) {
    schema_error(where, "expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

template <int Rows>
Eigen::Matrix<double, Rows, Eigen::Dynamic> columns(const json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where, "expected an array of " + std::to_string(Rows) + "-vectors");
  Eigen::Matrix<double, Rows, Eigen::Dynamic> m(Rows, static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto v = numbers(j[i], Rows, where + "[" + std::to_string(i) + "]");
    for (int r = 0; r < Rows; ++r) m(r, static_cast<Eigen::Index>(i)) = v[r];
  }
  return m;
}

template <typename Derived>
json columns_to_json(const Eigen::MatrixBase<Derived>& m) {
  json arr = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    json col = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) col.push_back(m(r, c));
    arr.push_back(std::move(col));
  }
  return arr;
}

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3(const json& j, const std::string& where) {
  const auto v = numbers(j, 3, where);
  return {v[0], v[1], v[2]};
}

bool is_default_convention(const JointConvention& c) {
  const JointConvention d = JointConvention::smpl24();
  return c.name == d.name && c.ankle_left == d.ankle_left && c.ankle_right == d.ankle_right &&
         c.height_chain == d.height_chain;
}

json convention_to_json(const JointConvention& c) {
  if (is_default_convention(c)) return c.name;
  return json{{"name", c.name}, {"ankle_left", c.ankle_left}, {"ankle_right", c.ankle_right},
              {"height_chain", c.height_chain}};
}

JointConvention convention_from_json(const json& j, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() == "smpl24") return JointConvention::smpl24();
    schema_error(where, "unknown joint convention '" + j.get<std::string>() + "'");
  }
  JointConvention c;
  c.name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "custom";
  c.ankle_left = integer(field(j, "ankle_left", where), where + ".ankle_left");
  c.ankle_right = integer(field(j, "ankle_right", where), where + ".ankle_right");
  const json& chain = field(j, "height_chain", where);
  if (!chain.is_array()) schema_error(where + ".height_chain", "expected an array of joint indices");
  c.height_chain.clear();
  for (const auto& idx : chain) c.height_chain.push_back(integer(idx, where + ".height_chain"));
  return c;
}

json person_to_json(const Person& p) {
  json j;
  j["joints"] = columns_to_json(p.joints);
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(p.rotation(r, c));
  }
  j["rotation"] = std::move(rot);
  if (p.has_translation) j["translation"] = vec_to_json(p.translation);
  if (p.weak_camera) {
    j["weak_camera"] = {{"sigma", p.weak_camera->sigma}, {"tx", p.weak_camera->tx}, {"ty", p.weak_camera->ty}};
  }
  j["scale"] = p.scale;
  j["keypoints"] = columns_to_json(p.keypoints);
  j["confidences"] = std::vector<double>(p.confidences.data(), p.confidences.data() + p.confidences.size());
  j["convention"] = convention_to_json(p.convention);
  return j;
}

Person person_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) schema_error(where, "expected an object");
  Person p;
  p.joints = columns<3>(field(j, "joints", where), where + ".joints");
  const auto rot = numbers(field(j, "rotation", where), 9, where + ".rotation");
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) p.rotation(r, c) = rot[3 * r + c];
  }
  p.has_translation = j.contains("translation");
  if (p.has_translation) p.translation = vec3(j["translation"], where + ".translation");
  if (j.contains("weak_camera")) {
    const json& wc = j["weak_camera"];
    p.weak_camera = WeakPerspectiveCam{number(field(wc, "sigma", where), where + ".weak_camera.sigma"),
                                       number(field(wc, "tx", where), where + ".weak_camera.tx"),
                                       number(field(wc, "ty", where), where + ".weak_camera.ty")};
  }
  if (!p.has_translation && !p.weak_camera) {
    schema_error(where, "needs either 'translation' or 'weak_camera'");
  }
  p.scale = j.contains("scale") ? number(j["scale"], where + ".scale") : 1.0;
  p.keypoints = columns<2>(field(j, "keypoints", where), where + ".keypoints");
  const auto conf = numbers(field(j, "confidences", where), 0, where + ".confidences");
  p.confidences = Eigen::Map<const Eigen::VectorXd>(conf.data(), static_cast<Eigen::Index>(conf.size()));
  p.convention = j.contains("convention") ? convention_from_json(j["convention"], where + ".convention")
                                          : JointConvention::smpl24();
  if (p.keypoints.cols() != p.joints.cols() || p.confidences.size() != p.joints.cols()) {
    schema_error(where, "joints, keypoints and confidences must have the same length");
  }
  try {
    p.validate();
  } catch (const Error& e) {
    schema_error(where, e.what());
  }
  return p;
}

void write_binary(const fs::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::io, "failed writing " + path.string());
}

std::string read_binary(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

json to_json(const SceneDocument& doc) {
  const Scene& s = doc.scene;
  json j;
  j["format"] = kSceneFormat;
  j["version"] = kFormatVersion;
  j["camera"] = {{"focal", s.camera.focal},
                 {"principal_point", {s.camera.principal_point.x(), s.camera.principal_point.y()}},
                 {"image_size", {s.camera.width, s.camera.height}}};
  json persons = json::array();
  for (const auto& p : s.persons) persons.push_back(person_to_json(p));
  j["persons"] = std::move(persons);
  if (s.plane) {
    json plane{{"normal", vec_to_json(s.plane->normal)}, {"point", vec_to_json(s.plane->point)}};
    if (doc.plane_fit) {
      plane["inliers"] = doc.plane_fit->inliers;
      plane["points"] = doc.plane_fit->points;
      plane["rms"] = doc.plane_fit->rms;
      plane["reference_person"] = doc.plane_fit->reference_person;
    }
    j["plane"] = std::move(plane);
  }
  return j;
}

SceneDocument scene_from_json(const json& j) {
  if (!j.is_object()) schema_error("scene", "expected a JSON object");
  if (j.contains("format") && j["format"] != kSceneFormat) schema_error("scene.format", "not a sizedepth scene");
  if (j.contains("version") && j["version"] != kFormatVersion) schema_error("scene.version", "unsupported version");

  SceneDocument doc;
  Scene& s = doc.scene;
  const json& cam = field(j, "camera", "scene");
  s.camera.focal = number(field(cam, "focal", "scene.camera"), "scene.camera.focal");
  const auto size = numbers(field(cam, "image_size", "scene.camera"), 2, "scene.camera.image_size");
  s.camera.width = static_cast<int>(size[0]);
  s.camera.height = static_cast<int>(size[1]);
  if (cam.contains("principal_point")) {
    const auto pp = numbers(cam["principal_point"], 2, "scene.camera.principal_point");
    s.camera.principal_point = Vec2(pp[0], pp[1]);
  } else {
    s.camera.principal_point = Vec2(0.5 * s.camera.width, 0.5 * s.camera.height);
  }
  try {
    s.camera.validate();
  } catch (const Error& e) {
    schema_error("scene.camera", e.what());
  }

  const json& persons = field(j, "persons", "scene");
  if (!persons.is_array() || persons.empty()) schema_error("scene.persons", "expected a nonempty array");
  for (std::size_t n = 0; n < persons.size(); ++n) {
    s.persons.push_back(person_from_json(persons[n], "scene.persons[" + std::to_string(n) + "]"));
  }

  if (j.contains("plane") && !j["plane"].is_null()) {
    const json& pj = j["plane"];
    GroundPlane plane{vec3(field(pj, "normal", "scene.plane"), "scene.plane.normal"),
                      vec3(field(pj, "point", "scene.plane"), "scene.plane.point")};
    try {
      plane.validate();
    } catch (const Error& e) {
      schema_error("scene.plane", e.what());
    }
    s.plane = plane;
    if (pj.contains("inliers")) {
      PlaneFitInfo info;
      info.inliers = integer(pj["inliers"], "scene.plane.inliers");
      info.points = pj.contains("points") ? integer(pj["points"], "scene.plane.points") : 0;
      info.rms = pj.contains("rms") ? number(pj["rms"], "scene.plane.rms") : 0.0;
      info.reference_person =
          pj.contains("reference_person") ? integer(pj["reference_person"], "scene.plane.reference_person") : 0;
      doc.plane_fit = info;
    }
  }
  return doc;
}

json read_json(const fs::path& path) {
  const std::string text = read_binary(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema, path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) { write_binary(path, text); }

SceneDocument load_scene(const fs::path& path) {
  try {
    return scene_from_json(read_json(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::schema) throw Error(ErrorCode::schema, path.string() + ": " + e.what());
    throw;
  }
}

void save_scene(const fs::path& path, const SceneDocument& doc) { write_text(path, to_json(doc).dump(2) + "\n"); }

fs::path depth_header_path(const fs::path& depth_path) { return fs::path(depth_path.string() + ".json"); }

void write_depth(const fs::path& depth_path, const fs::path& mask_path, const DepthObservation& obs) {
  obs.validate();
  std::string payload(obs.depth.size() * 4, '\0');
  for (std::size_t i = 0; i < obs.depth.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(obs.depth[i]);
    for (int b = 0; b < 4; ++b) payload[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
  }
  write_binary(depth_path, payload);
  write_binary(mask_path, std::string(obs.ground_mask.begin(), obs.ground_mask.end()));
  const json header{{"format", kDepthFormat}, {"version", kFormatVersion},   {"width", obs.width},
                    {"height", obs.height},   {"metric_scale", obs.metric_scale}, {"dtype", "float32"},
                    {"byte_order", "little"}};
  write_text(depth_header_path(depth_path), header.dump(2) + "\n");
}

DepthObservation read_depth(const fs::path& depth_path, const fs::path& mask_path) {
  const fs::path hdr_path = depth_header_path(depth_path);
  const json hdr = read_json(hdr_path);
  const std::string where = hdr_path.string();
  if (hdr.contains("format") && hdr["format"] != kDepthFormat) schema_error(where, "not a sizedepth depth header");
  if (hdr.contains("dtype") && hdr["dtype"] != "float32") schema_error(where, "dtype must be float32");
  if (!hdr.contains("byte_order") || hdr["byte_order"] != "little") {
    schema_error(where, "byte_order must be declared as \"little\"");
  }
  DepthObservation obs;
  obs.width = integer(field(hdr, "width", where), where + ".width");
  obs.height = integer(field(hdr, "height", where), where + ".height");
  obs.metric_scale = hdr.contains("metric_scale") ? number(hdr["metric_scale"], where + ".metric_scale") : 6.0;
  if (obs.width <= 0 || obs.height <= 0) schema_error(where, "width and height must be positive");
  const auto n = static_cast<std::size_t>(obs.width) * static_cast<std::size_t>(obs.height);

  const std::string payload = read_binary(depth_path);
  if (payload.size() != 4 * n) {
    schema_error(depth_path.string(), "payload is " + std::to_string(payload.size()) + " bytes, expected " +
                                          std::to_string(4 * n));
  }
  obs.depth.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(payload[4 * i + b])) << (8 * b);
    obs.depth[i] = std::bit_cast<float>(bits);
  }
  const std::string mask = read_binary(mask_path);
  if (mask.size() != n) {
    schema_error(mask_path.string(), "mask is " + std::to_string(mask.size()) + " bytes, expected " + std::to_string(n));
  }
  obs.ground_mask.assign(mask.begin(), mask.end());
  try {
    obs.validate();
  } catch (const Error& e) {
    schema_error(depth_path.string(), e.what());
  }
  return obs;
}

void write_trace_csv(const fs::path& path, std::span<const LossBreakdown> trace, const LossBreakdown& final_loss) {
  std::string out = "iteration,reprojection,plane,total\n";
  const auto row = [&out](std::size_t it, const LossBreakdown& l) {
    out += std::to_string(it) + "," + format_double(l.reprojection) + "," + format_double(l.plane) + "," +
           format_double(l.total) + "\n";
  };
  for (std::size_t i = 0; i < trace.size(); ++i) row(i, trace[i]);
  row(trace.size(), final_loss);
  write_text(path, out);
}

json to_json(const MetricsReport& r) {
  json frames = json::array();
  for (const auto& f : r.per_frame) {
    frames.push_back({{"persons", f.persons},
                      {"pairs", f.pairs},
                      {"depth_correct", f.depth_correct},
                      {"height_correct", f.height_correct},
                      {"d_norm", f.d_norm},
                      {"evaluated", f.evaluated}});
  }
  return {{"d_ord", r.d_ord},
          {"d_norm", r.d_norm},
          {"h_ord", r.h_ord},
          {"frames_evaluated", r.frames_evaluated},
          {"pairs_evaluated", r.pairs_evaluated},
          {"per_frame", std::move(frames)}};
}

MetricsReport metrics_from_json(const json& j) {
  MetricsReport r;
  r.d_ord = number(field(j, "d_ord", "metrics"), "metrics.d_ord");
  r.d_norm = number(field(j, "d_norm", "metrics"), "metrics.d_norm");
  r.h_ord = number(field(j, "h_ord", "metrics"), "metrics.h_ord");
  r.frames_evaluated = integer(field(j, "frames_evaluated", "metrics"), "metrics.frames_evaluated");
  r.pairs_evaluated = integer(field(j, "pairs_evaluated", "metrics"), "metrics.pairs_evaluated");
  for (const auto& f : field(j, "per_frame", "metrics")) {
    FrameMetrics fm;
    fm.persons = integer(field(f, "persons", "metrics.per_frame"), "persons");
    fm.pairs = integer(field(f, "pairs", "metrics.per_frame"), "pairs");
    fm.depth_correct = integer(field(f, "depth_correct", "metrics.per_frame"), "depth_correct");
    fm.height_correct = integer(field(f, "height_correct", "metrics.per_frame"), "height_correct");
    fm.d_norm = number(field(f, "d_norm", "metrics.per_frame"), "d_norm");
    fm.evaluated = field(f, "evaluated", "metrics.per_frame").get<bool>();
    r.per_frame.push_back(fm);
  }
  return r;
}

json to_json(const SynthConfig& c) {
  return {{"n_persons", c.n_persons},
          {"height_range", {c.height_range.first, c.height_range.second}},
          {"depth_range", {c.depth_range.first, c.depth_range.second}},
          {"plane_tilt_deg", c.plane_tilt_deg},
          {"camera_height", c.camera_height},
          {"keypoint_noise_px", c.keypoint_noise_px},
          {"per_person_noise_px", c.per_person_noise_px},
          {"ambiguity_factors", c.ambiguity_factors},
          {"ambiguity_range", {c.ambiguity_range.first, c.ambiguity_range.second}},
          {"anchor_reference", c.anchor_reference},
          {"outlier_fraction", c.outlier_fraction},
          {"min_separation", c.min_separation},
          {"max_ground_depth", c.max_ground_depth},
          {"footprint_margin_px", c.footprint_margin_px},
          {"focal", c.focal},
          {"image_size", {c.image_width, c.image_height}},
          {"metric_scale", c.metric_scale},
          {"rng_seed", c.rng_seed}};
}

SynthConfig synth_config_from_json(const json& j) {
  if (!j.is_object()) schema_error("synth config", "expected a JSON object");
  SynthConfig c;
  const auto range = [&](const char* key, std::pair<double, double>& dst) {
    if (!j.contains(key)) return;
    const auto v = numbers(j[key], 2, std::string("synth.") + key);
    dst = {v[0], v[1]};
  };
  const auto num = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = number(j[key], std::string("synth.") + key);
  };
  if (j.contains("n_persons")) c.n_persons = integer(j["n_persons"], "synth.n_persons");
  range("height_range", c.height_range);
  range("depth_range", c.depth_range);
  range("ambiguity_range", c.ambiguity_range);
  num("plane_tilt_deg", c.plane_tilt_deg);
  num("camera_height", c.camera_height);
  num("keypoint_noise_px", c.keypoint_noise_px);
  num("outlier_fraction", c.outlier_fraction);
  num("min_separation", c.min_separation);
  num("max_ground_depth", c.max_ground_depth);
  num("focal", c.focal);
  num("metric_scale", c.metric_scale);
  if (j.contains("per_person_noise_px")) c.per_person_noise_px = numbers(j["per_person_noise_px"], 0, "synth.per_person_noise_px");
  if (j.contains("ambiguity_factors")) c.ambiguity_factors = numbers(j["ambiguity_factors"], 0, "synth.ambiguity_factors");
  if (j.contains("anchor_reference")) {
    if (!j["anchor_reference"].is_boolean()) schema_error("synth.anchor_reference", "expected a boolean");
    c.anchor_reference = j["anchor_reference"].get<bool>();
  }
  if (j.contains("footprint_margin_px")) c.footprint_margin_px = integer(j["footprint_margin_px"], "synth.footprint_margin_px");
  if (j.contains("image_size")) {
    const auto v = numbers(j["image_size"], 2, "synth.image_size");
    c.image_width = static_cast<int>(v[0]);
    c.image_height = static_cast<int>(v[1]);
  }
  if (j.contains("rng_seed")) {
    if (!j["rng_seed"].is_number_unsigned() && !j["rng_seed"].is_number_integer()) {
      schema_error("synth.rng_seed", "expected a nonnegative integer");
    }
    c.rng_seed = j["rng_seed"].get<std::uint64_t>();
  }
  try {
    c.validate();
  } catch (const Error& e) {
    schema_error("synth config", e.what());
  }
  return c;
}

}  // namespace sizedepth::io
