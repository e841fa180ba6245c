/**
 * @file bindings.cpp
 * @brief Python module `_tfr` exposing the core operations on numpy arrays.
 */
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tfr/autoencoder.hpp"
#include "tfr/commands.hpp"
#include "tfr/detector.hpp"
#include "tfr/error.hpp"
#include "tfr/eval.hpp"
#include "tfr/fourier.hpp"
#include "tfr/synthgen.hpp"

namespace py = pybind11;
using namespace tfr;

namespace {

using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

ImageTensor to_tensor(const RealArray& a) {
  const auto info = a.request();
  if (info.ndim != 2 && info.ndim != 3) throw py::value_error("expected an (H, W) or (H, W, C) array");
  const int h = static_cast<int>(info.shape[0]);
  const int w = static_cast<int>(info.shape[1]);
  const int c = info.ndim == 3 ? static_cast<int>(info.shape[2]) : 1;
  const auto* p = static_cast<const double*>(info.ptr);
  return ImageTensor(h, w, c, std::vector<double>(p, p + static_cast<std::size_t>(h) * w * c));
}

RealArray from_tensor(const ImageTensor& img) {
  RealArray out({img.height(), img.width(), img.channels()});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

Field to_field_array(const RealArray& a) {
  const auto info = a.request();
  if (info.ndim != 2) throw py::value_error("expected a 2-D array");
  Field f(static_cast<int>(info.shape[0]), static_cast<int>(info.shape[1]));
  const auto* p = static_cast<const double*>(info.ptr);
  std::copy(p, p + f.data.size(), f.data.begin());
  return f;
}

RealArray from_field(const Field& f) {
  RealArray out({f.height, f.width});
  std::copy(f.data.begin(), f.data.end(), out.mutable_data());
  return out;
}

py::array_t<std::complex<double>> from_spectrum(const Spectrum& s) {
  py::array_t<std::complex<double>> out({s.height, s.width});
  std::copy(s.data.begin(), s.data.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_tfr, m) {
  m.doc() = "Template-based Fourier reconstruction anomaly detection";
  m.attr("__version__") = kToolVersion;

  py::register_exception<Error>(m, "TfrError", PyExc_RuntimeError);

  m.def("dft2", [](const RealArray& a) { return from_spectrum(dft2(to_field_array(a))); },
        "Unnormalized, uncentered 2-D DFT of a square real array.");
  m.def("highpass_filter", [](const RealArray& a, int tau) { return from_field(highpass_filter(to_field_array(a), tau)); },
        py::arg("image"), py::arg("tau"));
  m.def("make_mask", [](int size, int tau) {
        const HighPassMask mask = make_mask(size, tau);
        py::array_t<std::uint8_t> out({size, size});
        std::copy(mask.values.begin(), mask.values.end(), out.mutable_data());
        return out;
      }, py::arg("size"), py::arg("tau"));
  m.def("auc", [](const std::vector<int>& labels, const std::vector<double>& scores) { return auc(labels, scores); },
        py::arg("labels"), py::arg("scores"));
  m.def("recon_loss", [](const RealArray& x, const RealArray& r, double l1, double l2) {
        return recon_loss(to_tensor(x), to_tensor(r), l1, l2);
      }, py::arg("x"), py::arg("r"), py::arg("lambda_l1") = 1.0, py::arg("lambda_l2") = 100.0);

  m.def("gen_texture", [](int size, const std::string& base, int period, double noise, std::uint64_t seed) {
        TextureSpec s;
        s.size = size;
        s.base = parse_texture_base(base);
        s.period = period;
        s.noise_amplitude = noise;
        s.seed = seed;
        return from_tensor(gen_texture(s));
      }, py::arg("size") = 64, py::arg("base") = "sinusoid-grid", py::arg("period") = 8, py::arg("noise") = 0.05,
      py::arg("seed") = 0);
  m.def("inject_defect", [](const RealArray& image, const std::string& kind, int extent, double contrast,
                            int margin, std::uint64_t seed) {
        DefectSpec s;
        s.kind = parse_defect_kind(kind);
        s.extent = extent;
        s.contrast = contrast;
        s.margin = margin;
        s.seed = seed;
        const DefectResult r = inject_defect(to_tensor(image), s);
        return py::make_tuple(from_tensor(r.image), from_tensor(r.mask));
      }, py::arg("image"), py::arg("kind") = "blob", py::arg("extent") = 8, py::arg("contrast") = 0.4,
      py::arg("margin") = 10, py::arg("seed") = 0);

  m.def("load_image", [](const std::filesystem::path& p) { return from_tensor(load_image(p)); });
  m.def("save_image", [](const RealArray& a, const std::filesystem::path& p) { save_image(to_tensor(a), p); });

  py::class_<ModelWeights>(m, "Model")
      .def_static("initialize", [](int height, int width, int channels, const std::vector<int>& ladder,
                                   std::uint64_t seed) {
            ArchitectureDescriptor a;
            a.input_height = height;
            a.input_width = width;
            a.input_channels = channels;
            a.encoder_channels = ladder;
            return ModelWeights::initialize(a, seed);
          }, py::arg("height"), py::arg("width"), py::arg("channels"), py::arg("ladder"), py::arg("seed") = 0)
      .def_static("load", [](const std::filesystem::path& p) { return load_checkpoint(p); })
      .def("save", [](const ModelWeights& w, const std::filesystem::path& p) { save_checkpoint(w, p); })
      .def_property_readonly("parameter_count", &ModelWeights::parameter_count)
      .def("forward", [](const ModelWeights& w, const RealArray& a) { return from_tensor(forward(w, to_tensor(a))); })
      .def("fit", [](ModelWeights& w, const std::vector<RealArray>& images, int epochs, double lr, int batch_size,
                     bool augment, std::uint64_t seed) {
            std::vector<ImageTensor> imgs;
            for (const auto& a : images) imgs.push_back(to_tensor(a));
            TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.learning_rate = lr;
            cfg.batch_size = batch_size;
            cfg.use_augmentation = augment;
            cfg.seed = seed;
            TrainResult r = train(imgs, w.arch, cfg);
            w = std::move(r.model);
            return r.epoch_loss;
          }, py::arg("images"), py::arg("epochs") = 10, py::arg("learning_rate") = 1e-3, py::arg("batch_size") = 8,
          py::arg("augment") = false, py::arg("seed") = 0,
          "Trains a fresh model with this model's architecture; returns per-epoch mean loss.");

  m.def("detect_counts", [](const ModelWeights& model, const RealArray& template_source,
                            const std::vector<RealArray>& images, int tau, double th, int border) {
        const ImageTensor src = to_tensor(template_source);
        NormalTemplate tmpl("template", src, forward(model, src));
        DetectionParams p;
        p.tau = tau;
        p.th = th;
        p.border = border;
        std::vector<NamedImage> items;
        for (std::size_t i = 0; i < images.size(); ++i) {
          items.push_back({std::to_string(i), Label::kUnknown, to_tensor(images[i])});
        }
        std::vector<std::int64_t> counts;
        for (const auto& r : score_corpus(items, model, tmpl, p)) counts.push_back(r.raw_count);
        return counts;
      }, py::arg("model"), py::arg("template_source"), py::arg("images"), py::arg("tau") = 3, py::arg("th") = 4.0,
      py::arg("border") = 10);
}
