// Python bindings. Frames cross the boundary as uint8 arrays of shape
// (n_frames, height, width); labels as uint8 arrays of shape (n_frames,).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <sstream>

#include "cli.hpp"
#include "vidattack/detector.hpp"
#include "vidattack/effects.hpp"
#include "vidattack/error.hpp"
#include "vidattack/eval.hpp"
#include "vidattack/frameio.hpp"
#include "vidattack/netsim.hpp"
#include "vidattack/synth.hpp"

namespace py = pybind11;
using namespace vidattack;

namespace {

using Frames = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using Labels = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using Doubles = py::array_t<double, py::array::c_style | py::array::forcecast>;

VideoSequence to_video(const Frames& frames, const Labels& labels, Rational fps) {
  if (frames.ndim() != 3) throw Error(ErrorKind::InvalidArgument, "frames must have shape (n, height, width)");
  const auto n = static_cast<std::size_t>(frames.shape(0));
  const auto h = static_cast<std::uint32_t>(frames.shape(1));
  const auto w = static_cast<std::uint32_t>(frames.shape(2));
  VideoSequence v;
  v.fps = fps;
  const std::uint8_t* src = frames.data();
  const std::size_t plane = std::size_t{w} * h;
  for (std::size_t i = 0; i < n; ++i) v.frames.emplace_back(w, h, std::vector<std::uint8_t>(src + i * plane, src + (i + 1) * plane));
  if (labels.ndim() != 1) throw Error(ErrorKind::InvalidArgument, "labels must be one-dimensional");
  v.labels = LabelTrack(std::vector<std::uint8_t>(labels.data(), labels.data() + labels.size()));
  v.validate();
  return v;
}

Frames frames_of(const VideoSequence& v) {
  Frames out({static_cast<py::ssize_t>(v.size()), static_cast<py::ssize_t>(v.height()), static_cast<py::ssize_t>(v.width())});
  std::uint8_t* dst = out.mutable_data();
  for (const auto& f : v.frames) {
    std::memcpy(dst, f.pixels().data(), f.size());
    dst += f.size();
  }
  return out;
}

Labels labels_of(const LabelTrack& l) {
  Labels out(static_cast<py::ssize_t>(l.size()));
  std::memcpy(out.mutable_data(), l.values().data(), l.size());
  return out;
}

Doubles doubles_of(const std::vector<double>& v) {
  Doubles out(static_cast<py::ssize_t>(v.size()));
  std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
  return out;
}

py::tuple video_tuple(const VideoSequence& v) {
  return py::make_tuple(frames_of(v), labels_of(v.labels), py::make_tuple(v.fps.num, v.fps.den));
}

Rational fps_of(const py::tuple& t) {
  if (t.size() != 2) throw Error(ErrorKind::InvalidArgument, "fps must be (num, den)");
  return {t[0].cast<std::uint32_t>(), t[1].cast<std::uint32_t>()};
}

std::vector<std::string> tags_of(const effects::DisplayTrace& t) {
  std::vector<std::string> out;
  for (const auto& e : t) out.push_back(effects::to_string(e.tag));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stream-degradation attacks on synthetic surveillance video and PSNR anomaly-detector evaluation.";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<effects::DisplayTrace>(m, "DisplayTrace")
      .def_static("identity", &effects::DisplayTrace::identity, py::arg("n"))
      .def_static("from_csv", &effects::trace_from_csv, py::arg("text"))
      .def("__len__", &effects::DisplayTrace::size)
      .def_property_readonly("sources", &effects::DisplayTrace::sources)
      .def_property_readonly("tags", &tags_of)
      .def_property_readonly("resolutions",
                             [](const effects::DisplayTrace& t) {
                               std::vector<std::uint32_t> r;
                               for (const auto& e : t) r.push_back(e.resolution.factor);
                               return r;
                             })
      .def("runs",
           [](const effects::DisplayTrace& t) {
             std::vector<py::tuple> out;
             for (const auto& r : effects::tag_runs(t)) out.push_back(py::make_tuple(effects::to_string(r.tag), r.span.begin, r.span.end));
             return out;
           })
      .def("to_csv", &effects::trace_to_csv)
      .def("__eq__", [](const effects::DisplayTrace& a, const effects::DisplayTrace& b) { return a == b; });

  m.def(
      "synth",
      [](std::uint64_t seed, std::size_t n_frames, std::uint32_t width, std::uint32_t height, std::uint32_t object_size,
         std::uint32_t velocity, std::uint32_t noise, std::uint32_t sensor_noise, std::optional<std::pair<std::size_t, std::size_t>> anomaly,
         const std::string& anomaly_kind, std::uint32_t anomaly_velocity) {
        synth::SynthConfig c;
        c.seed = seed;
        c.n_frames = n_frames;
        c.width = width;
        c.height = height;
        c.object_size = object_size;
        c.normal_velocity = velocity;
        c.background_noise_amp = noise;
        c.sensor_noise_amp = sensor_noise;
        if (anomaly) {
          synth::AnomalyKind kind;
          if (anomaly_kind == "fast") kind = synth::AnomalyKind::FastMotion;
          else if (anomaly_kind == "appearance") kind = synth::AnomalyKind::Appearance;
          else throw Error(ErrorKind::InvalidArgument, "anomaly_kind must be fast or appearance");
          c.anomaly = synth::Anomaly{anomaly->first, anomaly->second, kind, anomaly_velocity};
        }
        return video_tuple(synth::generate(c));
      },
      py::arg("seed") = 0, py::arg("n_frames") = 400, py::arg("width") = 64, py::arg("height") = 64,
      py::arg("object_size") = 8, py::arg("velocity") = 1, py::arg("noise") = 24, py::arg("sensor_noise") = 0,
      py::arg("anomaly") = py::none(), py::arg("anomaly_kind") = "fast", py::arg("anomaly_velocity") = 4,
      "Generate a synthetic sequence; returns (frames, labels, fps).");

  m.def("load_sequence", [](const std::filesystem::path& manifest) { return video_tuple(frameio::load_sequence(manifest)); },
        py::arg("manifest"), "Load a manifest; returns (frames, labels, fps).");
  m.def(
      "save_sequence",
      [](const Frames& frames, const Labels& labels, const std::filesystem::path& out_dir, const std::string& format,
         const py::tuple& fps) {
        frameio::save_sequence(to_video(frames, labels, fps_of(fps)), out_dir, frameio::parse_format(format));
      },
      py::arg("frames"), py::arg("labels"), py::arg("out_dir"), py::arg("format") = "pgm",
      py::arg("fps") = py::make_tuple(25, 1));

  m.def("build_sff_trace", &effects::build_sff_trace, py::arg("n"), py::arg("onset"), py::arg("duration"),
        py::arg("slow_factor") = 2);
  m.def("build_lowres_trace", &effects::build_lowres_trace, py::arg("n"), py::arg("onset"), py::arg("duration"),
        py::arg("factor") = 4);
  m.def("build_combined_trace", &effects::build_combined_trace, py::arg("n"), py::arg("onset"), py::arg("duration"),
        py::arg("slow_factor") = 2, py::arg("lowres_factor") = 4);
  m.def("build_replicate_trace", &effects::build_replicate_trace, py::arg("n"), py::arg("k") = 1, py::arg("period") = 10);
  m.def(
      "build_extended_freeze_trace",
      [](std::size_t n, std::size_t begin, std::size_t end, std::size_t slow_len, std::uint32_t slow_factor) {
        return effects::build_extended_freeze_trace(n, {begin, end}, slow_len, slow_factor);
      },
      py::arg("n"), py::arg("anomaly_begin"), py::arg("anomaly_end"), py::arg("slow_len"), py::arg("slow_factor") = 2);
  m.def(
      "apply_trace",
      [](const Frames& frames, const Labels& labels, const effects::DisplayTrace& trace, const std::string& label_mode) {
        const auto mode = label_mode == "displayed" ? effects::LabelMode::Displayed : effects::LabelMode::Realtime;
        if (label_mode != "displayed" && label_mode != "realtime") {
          throw Error(ErrorKind::InvalidArgument, "label_mode must be realtime or displayed");
        }
        const auto out = effects::apply_trace(to_video(frames, labels, {}), trace, mode);
        return py::make_tuple(frames_of(out), labels_of(out.labels));
      },
      py::arg("frames"), py::arg("labels"), py::arg("trace"), py::arg("label_mode") = "realtime",
      "Returns (frames, labels) as displayed under the trace.");

  m.def(
      "simulate",
      [](const std::string& config_json, std::size_t n_ticks) {
        auto [trace, log] = netsim::simulate(netsim::parse_config(config_json, Rational{25, 1}), n_ticks);
        return py::make_tuple(trace, netsim::log_to_csv(log));
      },
      py::arg("config_json"), py::arg("n_ticks"), "Run the network simulator; returns (trace, event_log_csv).");

  m.def(
      "psnr",
      [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& b, double clamp_db) {
        if (a.ndim() != 2 || b.ndim() != 2) throw Error(ErrorKind::InvalidArgument, "psnr takes two 2-D frames");
        auto frame = [](const auto& arr) {
          const auto h = static_cast<std::uint32_t>(arr.shape(0)), w = static_cast<std::uint32_t>(arr.shape(1));
          return Frame(w, h, std::vector<std::uint8_t>(arr.data(), arr.data() + arr.size()));
        };
        return detector::psnr(frame(a), frame(b), clamp_db);
      },
      py::arg("a"), py::arg("b"), py::arg("clamp_db") = detector::kDefaultClampDb);
  m.def(
      "score_video",
      [](const Frames& frames, const std::string& predictor, double clamp_db) {
        Labels none(frames.ndim() == 3 ? frames.shape(0) : 0);
        std::memset(none.mutable_data(), 0, static_cast<std::size_t>(none.size()));
        const auto s = detector::score_video(to_video(frames, none, {}), detector::parse_predictor(predictor), clamp_db);
        return py::make_tuple(doubles_of(s.psnr), doubles_of(s.score));
      },
      py::arg("frames"), py::arg("predictor") = "prev", py::arg("clamp_db") = detector::kDefaultClampDb,
      "Returns (psnr, score) arrays; score is 1 - min-max normalised psnr.");

  m.def(
      "roc_auc",
      [](const Doubles& scores, const Labels& labels) {
        const std::vector<double> s(scores.data(), scores.data() + scores.size());
        const auto r = eval::roc_auc(s, LabelTrack(std::vector<std::uint8_t>(labels.data(), labels.data() + labels.size())));
        py::dict out;
        out["auc"] = r.auc;
        out["n_pos"] = r.n_pos;
        out["n_neg"] = r.n_neg;
        std::vector<double> th, fpr, tpr;
        for (const auto& p : r.points) {
          th.push_back(p.threshold);
          fpr.push_back(p.fpr);
          tpr.push_back(p.tpr);
        }
        out["thresholds"] = doubles_of(th);
        out["fpr"] = doubles_of(fpr);
        out["tpr"] = doubles_of(tpr);
        return out;
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "false_alarms",
      [](const Doubles& scores, const Labels& labels, double tau) {
        const std::vector<double> s(scores.data(), scores.data() + scores.size());
        const auto fa = eval::false_alarms(s, LabelTrack(std::vector<std::uint8_t>(labels.data(), labels.data() + labels.size())), tau);
        return py::make_tuple(fa.frame_count, fa.event_count);
      },
      py::arg("scores"), py::arg("labels"), py::arg("tau"), "Returns (frame_count, event_count).");
  m.def("percentile", &eval::percentile, py::arg("values"), py::arg("q"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        std::vector<std::string> argv{"vidattack"};
        argv.insert(argv.end(), args.begin(), args.end());
        const int code = cli::run(argv, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a vidattack subcommand; returns (exit_code, stdout, stderr).");
}
