#include "bboxlab/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace bboxlab {

using nlohmann::json;

const ObjectState* FrameAnnotation::find_track(std::int64_t track_id) const {
    for (const auto& obj : objects) {
        if (obj.track_id == track_id) return &obj;
    }
    return nullptr;
}

namespace {

// yaw normalized into (-pi, pi]
double normalize_yaw(double yaw) {
    while (yaw > M_PI) yaw -= 2.0 * M_PI;
    while (yaw <= -M_PI) yaw += 2.0 * M_PI;
    return yaw;
}

void insert_object(std::vector<FrameAnnotation>& frames, int frame_index,
                   ObjectState obj, std::size_t line_no) {
    if (frame_index < 0) throw ParseError("negative frame index", line_no);
    if (frames.size() <= static_cast<std::size_t>(frame_index)) {
        const std::size_t old = frames.size();
        frames.resize(static_cast<std::size_t>(frame_index) + 1);
        for (std::size_t i = old; i < frames.size(); ++i) {
            frames[i].frame_index = static_cast<int>(i);
        }
    }
    FrameAnnotation& frame = frames[static_cast<std::size_t>(frame_index)];
    if (frame.find_track(obj.track_id)) {
        throw ValidationError("duplicate track_id " + std::to_string(obj.track_id) +
                              " in frame " + std::to_string(frame_index));
    }
    frame.objects.push_back(std::move(obj));
}

}  // namespace

AnnotationStream parse_kitti_tracking(const std::string& label_text,
                                      const std::string& calib_text) {
    AnnotationStream stream;
    std::istringstream in(label_text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream ls(line);
        std::int64_t frame = 0, track_id = 0;
        std::string type;
        double truncated = 0, alpha = 0;
        int occluded = 0;
        double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
        double h = 0, w = 0, l = 0, x = 0, y = 0, z = 0, rot_y = 0;
        if (!(ls >> frame >> track_id >> type >> truncated >> occluded >> alpha >>
              x1 >> y1 >> x2 >> y2 >> h >> w >> l >> x >> y >> z >> rot_y)) {
            throw ParseError("malformed KITTI tracking record", line_no);
        }
        if (type == "DontCare") continue;
        if (track_id < 0) throw ParseError("negative track id for tracked object", line_no);

        ObjectState obj;
        obj.track_id = track_id;
        obj.class_label = type;
        obj.box2d = Box2D{x1, y1, x2, y2};
        if (!box_is_valid(obj.box2d)) throw ParseError("invalid 2D box", line_no);
        if (h > 0 && w > 0 && l > 0) {
            Box3D b3;
            b3.center = Vec3{x, y - h / 2.0, z};  // KITTI stores the bottom-face center
            b3.height = h;
            b3.width = w;
            b3.length = l;
            b3.yaw = normalize_yaw(rot_y);
            obj.box3d = b3;
        }
        insert_object(stream.frames, static_cast<int>(frame), std::move(obj), line_no);
    }
    if (!calib_text.empty()) {
        stream.calib = parse_kitti_calib(calib_text);
    }
    return stream;
}

CameraCalib parse_kitti_calib(const std::string& calib_text,
                              const std::string& matrix_name) {
    std::istringstream in(calib_text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string name;
        if (!(ls >> name)) continue;
        if (!name.empty() && name.back() == ':') name.pop_back();
        if (name != matrix_name) continue;
        CameraCalib calib;
        for (double& v : calib.projection) {
            if (!(ls >> v)) {
                throw ParseError("projection \"" + matrix_name + "\" needs 12 values",
                                 line_no);
            }
        }
        if (!calib.has_positive_focal()) {
            throw ParseError("projection \"" + matrix_name + "\" has non-positive focal",
                             line_no);
        }
        return calib;
    }
    throw ParseError("projection \"" + matrix_name + "\" not found in calibration text");
}

namespace {

Box2D parse_bbox_array(const json& arr, std::size_t line_no) {
    if (!arr.is_array() || arr.size() != 4) {
        throw ParseError("\"bbox\" must be [x1,y1,x2,y2]", line_no);
    }
    Box2D box{arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(),
              arr[3].get<double>()};
    if (!box_is_valid(box)) {
        throw ValidationError("invalid bbox at line " + std::to_string(line_no) +
                              ": requires finite coordinates with x1<=x2, y1<=y2");
    }
    return box;
}

Box3D parse_box3d_object(const json& obj, std::size_t line_no) {
    Box3D b3;
    const auto& center = obj.at("center");
    const auto& dims = obj.at("dims");
    if (!center.is_array() || center.size() != 3 || !dims.is_array() || dims.size() != 3) {
        throw ParseError("\"box3d\" needs center[3] and dims[3]", line_no);
    }
    b3.center = Vec3{center[0].get<double>(), center[1].get<double>(),
                     center[2].get<double>()};
    b3.height = dims[0].get<double>();
    b3.width = dims[1].get<double>();
    b3.length = dims[2].get<double>();
    b3.yaw = obj.value("yaw", 0.0);
    if (!box3d_is_valid(b3)) {
        throw ValidationError("invalid box3d at line " + std::to_string(line_no));
    }
    return b3;
}

}  // namespace

ClipAnnotation parse_generic_jsonl(const std::string& text) {
    ClipAnnotation clip;
    clip.frames.clear();
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool saw_record = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("bad JSON: ") + e.what(), line_no);
        }
        if (!j.is_object()) throw ParseError("expected a JSON object", line_no);
        if (!j.contains("frame")) {
            // Header line with clip geometry; only valid before any record.
            if (saw_record) throw ParseError("header line after records", line_no);
            clip.width = j.value("width", clip.width);
            clip.height = j.value("height", clip.height);
            clip.fps = j.value("fps", clip.fps);
            if (clip.width <= 0 || clip.height <= 0 || clip.fps <= 0) {
                throw ValidationError("header requires positive width/height/fps");
            }
            continue;
        }
        saw_record = true;
        ObjectState obj;
        obj.track_id = j.at("track_id").get<std::int64_t>();
        if (obj.track_id < 0) {
            throw ValidationError("negative track_id at line " + std::to_string(line_no));
        }
        obj.class_label = j.at("class").get<std::string>();
        if (obj.class_label.empty()) {
            throw ValidationError("empty class label at line " + std::to_string(line_no));
        }
        obj.box2d = parse_bbox_array(j.at("bbox"), line_no);
        if (j.contains("box3d") && !j.at("box3d").is_null()) {
            obj.box3d = parse_box3d_object(j.at("box3d"), line_no);
        }
        insert_object(clip.frames, j.at("frame").get<int>(), std::move(obj), line_no);
    }
    return clip;
}

std::string write_generic_jsonl(const ClipAnnotation& clip) {
    std::ostringstream out;
    json header = {{"width", clip.width}, {"height", clip.height}, {"fps", clip.fps}};
    out << header.dump() << "\n";
    for (const auto& frame : clip.frames) {
        for (const auto& obj : frame.objects) {
            json j = {{"frame", frame.frame_index},
                      {"track_id", obj.track_id},
                      {"class", obj.class_label},
                      {"bbox", {obj.box2d.x1, obj.box2d.y1, obj.box2d.x2, obj.box2d.y2}}};
            if (obj.box3d) {
                const Box3D& b = *obj.box3d;
                j["box3d"] = {{"center", {b.center.x, b.center.y, b.center.z}},
                              {"dims", {b.height, b.width, b.length}},
                              {"yaw", b.yaw}};
            }
            out << j.dump() << "\n";
        }
    }
    return out.str();
}

ClipAnnotation window_clip(const AnnotationStream& stream, int start, int length) {
    if (length <= 0) throw ValidationError("window length must be positive");
    const int available = static_cast<int>(stream.frames.size());
    if (start < 0 || start + length > available) {
        throw ValidationError("window [" + std::to_string(start) + ", " +
                              std::to_string(start + length) +
                              ") outside available frames [0, " +
                              std::to_string(available) + ")");
    }

    // First pass: per-frame overflow pruning decides which tracks to drop.
    std::unordered_set<std::int64_t> dropped;
    for (int i = 0; i < length; ++i) {
        const FrameAnnotation& frame = stream.frames[static_cast<std::size_t>(start + i)];
        if (frame.objects.size() <= static_cast<std::size_t>(kMaxObjectsPerFrame)) continue;
        std::vector<const ObjectState*> ranked;
        ranked.reserve(frame.objects.size());
        for (const auto& obj : frame.objects) ranked.push_back(&obj);
        std::sort(ranked.begin(), ranked.end(),
                  [](const ObjectState* a, const ObjectState* b) {
                      const double aa = a->box2d.area(), ab = b->box2d.area();
                      if (aa != ab) return aa > ab;
                      return a->track_id < b->track_id;
                  });
        for (std::size_t k = kMaxObjectsPerFrame; k < ranked.size(); ++k) {
            dropped.insert(ranked[k]->track_id);
        }
    }

    ClipAnnotation clip;
    clip.width = stream.width;
    clip.height = stream.height;
    clip.fps = stream.fps;
    clip.frames.resize(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) {
        const FrameAnnotation& src = stream.frames[static_cast<std::size_t>(start + i)];
        FrameAnnotation& dst = clip.frames[static_cast<std::size_t>(i)];
        dst.frame_index = i;
        for (const auto& obj : src.objects) {
            if (!dropped.count(obj.track_id)) dst.objects.push_back(obj);
        }
    }
    return clip;
}

ClipAnnotation rescale_annotation(const ClipAnnotation& clip, int target_w,
                                  int target_h) {
    if (target_w <= 0 || target_h <= 0) {
        throw ValidationError("target dimensions must be positive");
    }
    if (clip.width <= 0 || clip.height <= 0) {
        throw ValidationError("clip dimensions must be positive");
    }
    const double sx = static_cast<double>(target_w) / clip.width;
    const double sy = static_cast<double>(target_h) / clip.height;
    ClipAnnotation out = clip;
    out.width = target_w;
    out.height = target_h;
    for (auto& frame : out.frames) {
        for (auto& obj : frame.objects) {
            obj.box2d.x1 *= sx;
            obj.box2d.x2 *= sx;
            obj.box2d.y1 *= sy;
            obj.box2d.y2 *= sy;
        }
    }
    return out;
}

}  // namespace bboxlab
