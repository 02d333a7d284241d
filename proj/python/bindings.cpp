#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tubedetr/complexity.hpp"
#include "tubedetr/errors.hpp"
#include "tubedetr/metrics.hpp"
#include "tubedetr/tape.hpp"
#include "tubedetr/trainer.hpp"

namespace py = pybind11;
using namespace tubedetr;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  Array out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

Tube make_tube(std::size_t ts, std::size_t te, const std::vector<CenterBox>& boxes) {
  if (te < ts || boxes.size() != te - ts + 1) throw ValidationError("tube: need one box per frame of [t_s, t_e]");
  return {ts, te, boxes};
}

py::dict prediction_dict(const Prediction& p) {
  py::dict d;
  d["t_s"] = p.tube.t_start;
  d["t_e"] = p.tube.t_end;
  d["boxes"] = p.tube.boxes;
  d["frame_boxes"] = p.frame_boxes;
  return d;
}

}  // namespace

PYBIND11_MODULE(_tubedetr, m) {
  m.doc() = "Spatio-temporal video grounding core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def("target_distribution", &build_target_distribution, py::arg("center"), py::arg("frames"));

  m.def(
      "decode_span",
      [](const std::vector<double>& start, const std::vector<double>& end) {
        if (start.size() != end.size()) throw DimensionError("decode_span: start and end lengths differ");
        return joint_start_end_argmax(start, end);
      },
      py::arg("start_prob"), py::arg("end_prob"));

  m.def("box_iou", &center_box_iou, py::arg("a"), py::arg("b"));

  m.def(
      "viou",
      [](std::size_t ps, std::size_t pe, const std::vector<CenterBox>& pb, std::size_t gs, std::size_t ge,
         const std::vector<CenterBox>& gb) { return viou(make_tube(ps, pe, pb), make_tube(gs, ge, gb)); },
      py::arg("pred_start"), py::arg("pred_end"), py::arg("pred_boxes"), py::arg("gt_start"), py::arg("gt_end"),
      py::arg("gt_boxes"));
  m.def(
      "tiou",
      [](std::size_t ps, std::size_t pe, std::size_t gs, std::size_t ge) {
        const CenterBox z{0, 0, 0, 0};
        return tiou(make_tube(ps, pe, std::vector<CenterBox>(pe - ps + 1, z)),
                    make_tube(gs, ge, std::vector<CenterBox>(ge - gs + 1, z)));
      },
      py::arg("pred_start"), py::arg("pred_end"), py::arg("gt_start"), py::arg("gt_end"));
  m.def(
      "siou",
      [](const std::vector<CenterBox>& frame_boxes, std::size_t gs, std::size_t ge, const std::vector<CenterBox>& gb) {
        return siou(frame_boxes, make_tube(gs, ge, gb));
      },
      py::arg("frame_boxes"), py::arg("gt_start"), py::arg("gt_end"), py::arg("gt_boxes"));

  m.def(
      "complexity",
      [](std::uint64_t T, std::uint64_t k, std::uint64_t HW, std::uint64_t L, std::uint64_t N, std::uint64_t d,
         std::uint64_t heads) {
        return py::module_::import("json").attr("loads")(complexity_report({T, HW, L, k, N, d, heads}).to_json());
      },
      py::arg("T") = 200, py::arg("k") = 5, py::arg("HW") = 49, py::arg("L") = 16, py::arg("N") = 6,
      py::arg("d") = 256, py::arg("heads") = 8);

  m.def(
      "generate_sample",
      [](std::uint64_t seed, std::size_t index, std::size_t frames, std::size_t height, std::size_t width) {
        SceneParams p;
        p.frames = frames;
        p.height = height;
        p.width = width;
        const auto s = generate_sample(seed, index, p);
        return py::make_tuple(to_array(s.video), py::module_::import("json").attr("loads")(s.annotation.to_json().dump()));
      },
      py::arg("seed"), py::arg("index"), py::arg("frames") = 16, py::arg("height") = 32, py::arg("width") = 32);

  py::class_<Trainer>(m, "Model")
      .def(py::init([](const std::string& config_json) {
             return std::make_unique<Trainer>(RunConfig::from_json(nlohmann::json::parse(config_json)));
           }),
           py::arg("config_json") = "{}")
      .def("load", [](Trainer& t, const std::string& dir) { t.load(dir); })
      .def("save", [](const Trainer& t, const std::string& dir) { t.save(dir); })
      .def("parameter_count", [](const Trainer& t) { return t.model().parameters().count_scalars(); })
      .def(
          "predict",
          [](const Trainer& t, const Array& video, const std::string& query) {
            AnnotationRecord a;
            a.query = query;
            SyntheticSample s{to_tensor(video), a};
            return prediction_dict(predict(t.model(), t.vocabulary(), s));
          },
          py::arg("video"), py::arg("query"))
      .def(
          "loss",
          [](const Trainer& t, const Array& video, const std::string& annotation_json) {
            const auto a = AnnotationRecord::from_json(nlohmann::json::parse(annotation_json));
            const auto l = t.eval_loss({to_tensor(video), a});
            py::dict d;
            d["total"] = l.total.item();
            d["l1"] = l.l1;
            d["giou"] = l.giou;
            d["kl"] = l.kl;
            d["att"] = l.att;
            return d;
          },
          py::arg("video"), py::arg("annotation_json"));
}
