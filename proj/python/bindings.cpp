#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <map>
#include <sstream>

#include "signstitch/augment.hpp"
#include "signstitch/metrics.hpp"
#include "signstitch/pose_io.hpp"

namespace py = pybind11;
using namespace signstitch;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (frames, keypoints, 3) array <-> PoseSequence
PoseSequence to_poses(const Array& a, double fps) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw InvalidInputError("poses must have shape (frames, keypoints, 3)");
  const auto* p = a.data();
  return PoseSequence(static_cast<std::size_t>(a.shape(1)), fps, std::vector<double>(p, p + a.size()));
}

Array from_poses(const PoseSequence& s) {
  Array out({s.frames(), s.keypoints(), std::size_t{3}});
  std::copy(s.values().begin(), s.values().end(), out.mutable_data());
  return out;
}

AngleSequence to_angles(const Array& a, double fps) {
  if (a.ndim() != 2) throw InvalidInputError("angles must have shape (frames, slots)");
  const auto* p = a.data();
  return AngleSequence(static_cast<std::size_t>(a.shape(1)), fps, std::vector<double>(p, p + a.size()));
}

py::list spans(const std::vector<FrameSpan>& s) {
  py::list out;
  for (const auto& f : s) out.append(py::make_tuple(f.start, f.end));
  return out;
}

py::dict result_dict(const StitchResult& r) {
  py::dict d;
  d["poses"] = from_poses(r.poses);
  d["fps"] = r.poses.fps();
  d["gloss_spans"] = spans(r.gloss_spans);
  d["transition_spans"] = spans(r.transition_spans);
  d["resolved_glosses"] = r.resolved_glosses;
  py::list plans;
  for (const auto& t : r.transitions) {
    py::dict p;
    p["frames"] = t.frames;
    p["distance"] = t.distance;
    p["boundary_velocity"] = t.boundary_velocity;
    p["velocity_bound"] = t.velocity_bound;
    p["capped"] = t.capped;
    plans.append(p);
  }
  d["transitions"] = plans;
  return d;
}

StitchRequest make_request(std::vector<std::string> glosses, std::optional<std::vector<std::size_t>> durations,
                           double cutoff_hz, double fps) {
  StitchRequest req;
  req.glosses = std::move(glosses);
  req.durations = std::move(durations);
  req.cutoff_hz = cutoff_hz;
  req.fps = fps;
  return req;
}

PermuteMode permute_mode(const std::string& m) {
  if (m == "window") return PermuteMode::kWindow;
  if (m == "swaps") return PermuteMode::kSwaps;
  throw InvalidInputError("mode must be 'window' or 'swaps'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stitch isolated-sign skeleton clips into continuous signing sequences";

  auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<InvalidInputError>(m, "InvalidInputError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<UnresolvableGlossError>(m, "UnresolvableGlossError", base.ptr());
  py::register_exception<ConfigurationError>(m, "ConfigurationError", base.ptr());
  py::register_exception<DegenerateFrameError>(m, "DegenerateFrameError", base.ptr());

  m.attr("KEYPOINTS") = kKeypointCount;
  m.attr("ANGLES") = kAngleCount;
  m.attr("DEFAULT_FPS") = kDefaultFps;
  m.attr("DEFAULT_CUTOFF_HZ") = kDefaultCutoffHz;

  py::class_<CanonicalSkeleton>(m, "Skeleton")
      .def_static("reference", &reference_skeleton, py::return_value_policy::reference)
      .def_static("load", &load_skeleton_file, py::arg("path"))
      .def_property_readonly("id", &CanonicalSkeleton::id)
      .def_property_readonly("keypoint_count", &CanonicalSkeleton::keypoint_count)
      .def_property_readonly("angle_count", &CanonicalSkeleton::angle_count)
      .def_property_readonly("names", [](const CanonicalSkeleton& s) { return s.layout().names; })
      .def_property_readonly("parents", [](const CanonicalSkeleton& s) { return s.layout().parents; })
      .def_property_readonly("bone_lengths", &CanonicalSkeleton::bone_lengths)
      .def("rest_pose", &CanonicalSkeleton::rest_pose)
      .def("to_json", [](const CanonicalSkeleton& s) {
        std::ostringstream out;
        save_skeleton(s, out);
        return out.str();
      });

  py::class_<Dictionary>(m, "Dictionary")
      .def(py::init([](const std::map<std::string, Array>& entries, double fps, const std::string& skeleton_id) {
             std::vector<DictEntry> e;
             for (const auto& [g, a] : entries) e.push_back({g, to_angles(a, fps)});
             return Dictionary(fps, skeleton_id, std::move(e));
           }),
           py::arg("entries"), py::arg("fps") = kDefaultFps, py::arg("skeleton_id") = "reference-61")
      .def_static("load", &load_dictionary_file, py::arg("path"))
      .def("save", [](const Dictionary& d, const std::string& path) {
        std::ostringstream out;
        save_dictionary(d, out);
        std::ofstream(path, std::ios::binary) << out.str();
      })
      .def_property_readonly("fps", &Dictionary::fps)
      .def_property_readonly("skeleton_id", &Dictionary::skeleton_id)
      .def_property_readonly("glosses",
                             [](const Dictionary& d) {
                               std::vector<std::string> g;
                               for (const auto& e : d.entries()) g.push_back(e.gloss);
                               return g;
                             })
      .def("angles",
           [](const Dictionary& d, const std::string& gloss) {
             const DictEntry* e = d.lookup(gloss);
             if (e == nullptr) throw py::key_error(gloss);
             Array out({e->angles.frames(), e->angles.width()});
             std::copy(e->angles.values().begin(), e->angles.values().end(), out.mutable_data());
             return out;
           })
      .def("__contains__", &Dictionary::contains)
      .def("__len__", &Dictionary::size);

  py::class_<EmbeddingTable>(m, "Embeddings")
      .def(py::init<std::size_t>(), py::arg("dim"))
      .def_static("load", &load_embeddings_file, py::arg("path"))
      .def("add", &EmbeddingTable::add, py::arg("token"), py::arg("vector"))
      .def_property_readonly("dim", &EmbeddingTable::dim)
      .def("__len__", &EmbeddingTable::size);

  m.def(
      "resolve",
      [](const Dictionary& d, const std::string& gloss, const EmbeddingTable* emb) {
        const Resolution r = resolve(d, gloss, emb);
        return py::make_tuple(r.matched_gloss, r.similarity);
      },
      py::arg("dictionary"), py::arg("gloss"), py::arg("embeddings") = nullptr,
      "Dictionary gloss used for `gloss` and its cosine similarity (1.0 for an exact hit).");

  m.def(
      "forward_kinematics",
      [](const Array& angles, const CanonicalSkeleton* skel) -> py::object {
        const CanonicalSkeleton& s = skel ? *skel : reference_skeleton();
        if (angles.ndim() == 1) {
          const AngleFrame a = Eigen::Map<const AngleFrame>(angles.data(), angles.shape(0));
          return py::cast(forward_kinematics(a, s));
        }
        return from_poses(forward_kinematics(to_angles(angles, kDefaultFps), s));
      },
      py::arg("angles"), py::arg("skeleton") = nullptr,
      "(slots,) or (frames, slots) joint angles to (keypoints, 3) or (frames, keypoints, 3) positions.");

  m.def(
      "normalize_pose",
      [](const Array& poses) { return from_poses(normalize_pose(to_poses(poses, kDefaultFps), reference_skeleton().layout())); },
      py::arg("poses"));

  m.def(
      "resample", [](const Array& poses, std::size_t frames) { return from_poses(resample(to_poses(poses, kDefaultFps), frames)); },
      py::arg("poses"), py::arg("frames"));

  m.def(
      "butterworth_lowpass",
      [](const Array& poses, double cutoff_hz, double fps, int order) {
        return from_poses(butterworth_lowpass(to_poses(poses, fps), cutoff_hz, order));
      },
      py::arg("poses"), py::arg("cutoff_hz") = kDefaultCutoffHz, py::arg("fps") = kDefaultFps, py::arg("order") = 4);

  m.def(
      "stitch",
      [](const std::vector<std::string>& glosses, const Dictionary& d, std::optional<std::vector<std::size_t>> durations,
         double cutoff_hz, double fps, const EmbeddingTable* emb, bool filtered) {
        const StitchRequest req = make_request(glosses, std::move(durations), cutoff_hz, fps);
        StitchResult r;
        {
          py::gil_scoped_release release;
          r = filtered ? stitch(req, d, emb, reference_skeleton()) : stitch_unfiltered(req, d, emb, reference_skeleton());
        }
        return result_dict(r);
      },
      py::arg("glosses"), py::arg("dictionary"), py::arg("durations") = py::none(),
      py::arg("cutoff_hz") = kDefaultCutoffHz, py::arg("fps") = kDefaultFps, py::arg("embeddings") = nullptr,
      py::arg("filtered") = true);

  m.def(
      "permute_glosses",
      [](const std::vector<std::string>& glosses, std::size_t n, std::uint64_t seed, const std::string& mode) {
        return permute_glosses(glosses, n, seed, permute_mode(mode));
      },
      py::arg("glosses"), py::arg("n"), py::arg("seed"), py::arg("mode") = "window");

  m.def(
      "scale_speed", [](const Array& poses, double scale) { return from_poses(scale_speed(to_poses(poses, kDefaultFps), scale)); },
      py::arg("poses"), py::arg("scale"));

  m.def(
      "score",
      [](const std::vector<std::string>& hypotheses, const std::vector<std::string>& references, bool smooth) {
        if (hypotheses.size() != references.size())
          throw InvalidInputError("got " + std::to_string(hypotheses.size()) + " hypotheses for " +
                                  std::to_string(references.size()) + " references");
        Corpus c;
        for (std::size_t i = 0; i < hypotheses.size(); ++i) c.push_back({tokenize(hypotheses[i]), tokenize(references[i])});
        BleuOptions opts;
        opts.add_one_smoothing = smooth;
        const ScoreReport r = score(c, opts);
        py::dict d;
        for (std::size_t n = 0; n < r.bleu.size(); ++n) d[py::str("bleu_" + std::to_string(n + 1))] = r.bleu[n];
        d["rouge_l"] = r.rouge_l;
        d["brevity_penalty"] = r.brevity_penalty;
        d["precisions"] = r.precisions;
        return d;
      },
      py::arg("hypotheses"), py::arg("references"), py::arg("smooth") = false);

  m.def(
      "write_sspk",
      [](const Array& poses, double fps, const std::string& path) {
        write_pose_file(to_poses(poses, fps), path, PoseFormat::kSspk);
      },
      py::arg("poses"), py::arg("fps"), py::arg("path"));

  m.def(
      "read_pose_file",
      [](const std::string& path) {
        const PoseSequence p = read_pose_file(path);
        return py::make_tuple(from_poses(p), p.fps());
      },
      py::arg("path"), "(poses, fps) from an SSPK or JSON pose file.");
}
