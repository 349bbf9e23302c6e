#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sgak/error.hpp"
#include "sgak/gak.hpp"
#include "sgak/kernel.hpp"
#include "sgak/structure_loss.hpp"

namespace py = pybind11;
using namespace sgak;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Contiguous float64 input is viewed without copying; anything else is
// converted once, with a warning.
RowMatrix as_matrix(const py::array& a, const char* name, int ndim) {
  if (a.ndim() != ndim) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(name) + " must be " + std::to_string(ndim) + "-D, got " + std::to_string(a.ndim()) + "-D");
  }
  using Dense = py::array_t<double, py::array::c_style>;
  py::array_t<double, py::array::c_style | py::array::forcecast> arr;
  if (py::isinstance<Dense>(a)) {
    arr = py::reinterpret_borrow<Dense>(a);
  } else {
    if (PyErr_WarnEx(PyExc_RuntimeWarning,
                     (std::string(name) + ": copying to contiguous float64").c_str(), 1) != 0) {
      throw py::error_already_set();
    }
    arr = a;
  }
  const auto rows = ndim == 2 ? arr.shape(0) : 1;
  const auto cols = ndim == 2 ? arr.shape(1) : arr.shape(0);
  return Eigen::Map<const RowMatrix>(arr.data(), rows, cols);
}

Modality parse_modality(const std::string& m) {
  if (m == "image") return Modality::Image;
  if (m == "text") return Modality::Text;
  throw Error(ErrorCode::kInvalidArgument, "modality must be 'image' or 'text', got '" + m + "'");
}

KernelMode parse_mode(const std::string& m) {
  if (m == "triple") return KernelMode::Triple;
  if (m == "shared-only") return KernelMode::SharedOnly;
  throw Error(ErrorCode::kInvalidArgument, "kernel_mode must be 'triple' or 'shared-only'");
}

SliceEmbedding make_slice(const Vector& row, Modality m, std::optional<Eigen::Index> specialist_dim) {
  if (!specialist_dim) return SliceEmbedding::atomic(m, row);
  const Eigen::Index d1 = *specialist_dim;
  if (d1 <= 0 || d1 >= row.size()) {
    throw Error(ErrorCode::kShapeMismatch, "specialist_dim must lie strictly inside the row width");
  }
  return SliceEmbedding::composite(m, row.head(d1), row.tail(row.size() - d1));
}

InterleavedSequence make_sequence(const std::string& id, const py::array& slices,
                                  const std::vector<std::string>& modalities,
                                  std::optional<Eigen::Index> specialist_dim) {
  const RowMatrix rows = as_matrix(slices, "slices", 2);
  if (static_cast<std::size_t>(rows.rows()) != modalities.size()) {
    throw Error(ErrorCode::kShapeMismatch, "need one modality per slice row");
  }
  InterleavedSequence seq{id, {}};
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    seq.slices.push_back(make_slice(rows.row(i).transpose(), parse_modality(modalities[static_cast<std::size_t>(i)]),
                                    specialist_dim));
  }
  return seq;
}

KernelConfig make_config(double delta, bool normalize, const std::string& mode, std::size_t cell_cap) {
  KernelConfig cfg;
  cfg.delta = delta;
  cfg.normalize_gak = normalize;
  cfg.kernel_mode = parse_mode(mode);
  cfg.cell_cap = cell_cap;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_sgak, m) {
  m.doc() = "Native kernels for the sgak package";

  static py::exception<Error> sgak_error(m, "SgakError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(sgak_error.ptr())(e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(sgak_error.ptr(), exc.ptr());
    }
  });

  m.def(
      "triple_distance",
      [](const py::array& a, const py::array& b, const std::string& modality_a, const std::string& modality_b,
         std::optional<Eigen::Index> specialist_dim, const std::string& kernel_mode) {
        const Vector va = as_matrix(a, "a", 1).row(0).transpose();
        const Vector vb = as_matrix(b, "b", 1).row(0).transpose();
        const auto sa = make_slice(va, parse_modality(modality_a), specialist_dim);
        const auto sb = make_slice(vb, parse_modality(modality_b), specialist_dim);
        const auto mode = parse_mode(kernel_mode);
        py::gil_scoped_release release;
        return triple_distance(sa, sb, mode);
      },
      py::arg("a"), py::arg("b"), py::arg("modality_a"), py::arg("modality_b"),
      py::arg("specialist_dim") = py::none(), py::arg("kernel_mode") = "triple");

  m.def(
      "gak_forward",
      [](const py::array& x, const py::array& y, const std::vector<std::string>& x_modalities,
         const std::vector<std::string>& y_modalities, std::optional<Eigen::Index> specialist_dim, double delta,
         bool normalize, const std::string& kernel_mode, std::size_t cell_cap) {
        const auto sx = make_sequence("x", x, x_modalities, specialist_dim);
        const auto sy = make_sequence("y", y, y_modalities, specialist_dim);
        const auto cfg = make_config(delta, normalize, kernel_mode, cell_cap);
        py::gil_scoped_release release;
        return gak_forward(sx, sy, cfg);
      },
      py::arg("x"), py::arg("y"), py::arg("x_modalities"), py::arg("y_modalities"),
      py::arg("specialist_dim") = py::none(), py::arg("delta") = 1.0, py::arg("normalize") = false,
      py::arg("kernel_mode") = "triple", py::arg("cell_cap") = 16384);

  m.def(
      "label_matrix",
      [](const std::vector<std::string>& doc_ids, const std::vector<py::array>& views,
         const std::vector<std::vector<std::string>>& modalities, std::optional<Eigen::Index> specialist_dim,
         double delta, const std::string& kernel_mode, const std::string& single_slice_mode, bool raw_gak) {
        if (doc_ids.size() != views.size() || views.size() != modalities.size()) {
          throw Error(ErrorCode::kShapeMismatch, "doc_ids, views and modalities must align");
        }
        std::vector<PrefixView> pv;
        for (std::size_t i = 0; i < views.size(); ++i) {
          auto seq = make_sequence(doc_ids[i], views[i], modalities[i], specialist_dim);
          pv.push_back({doc_ids[i], seq.size(), std::move(seq.slices)});
        }
        auto cfg = make_config(delta, false, kernel_mode, 16384);
        cfg.raw_gak_labels = raw_gak;
        if (single_slice_mode == "closed-form") {
          cfg.label_single_slice_mode = LabelSingleSliceMode::ClosedForm;
        } else if (single_slice_mode != "cosine") {
          throw Error(ErrorCode::kInvalidArgument, "single_slice_mode must be 'cosine' or 'closed-form'");
        }
        py::gil_scoped_release release;
        return Eigen::MatrixXd(label_matrix(pv, cfg).entries);
      },
      py::arg("doc_ids"), py::arg("views"), py::arg("modalities"), py::arg("specialist_dim") = py::none(),
      py::arg("delta") = 1.0, py::arg("kernel_mode") = "triple", py::arg("single_slice_mode") = "cosine",
      py::arg("raw_gak") = false);

  m.def(
      "mse_loss",
      [](const py::array& mr, const py::array& ml) {
        const SimilarityMatrix r{MatrixKind::Representation, as_matrix(mr, "mr", 2)};
        const SimilarityMatrix l{MatrixKind::Label, as_matrix(ml, "ml", 2)};
        py::gil_scoped_release release;
        return mse_loss(r, l);
      },
      py::arg("mr"), py::arg("ml"));

  m.def(
      "loss_gradient",
      [](const py::array& reps, const py::array& ml) {
        const RowMatrix r = as_matrix(reps, "reps", 2);
        const SimilarityMatrix l{MatrixKind::Label, as_matrix(ml, "ml", 2)};
        std::vector<Vector> rows;
        for (Eigen::Index i = 0; i < r.rows(); ++i) rows.push_back(r.row(i).transpose());
        RowMatrix out(r.rows(), r.cols());
        {
          py::gil_scoped_release release;
          const auto grads = loss_gradient(std::span<const Vector>(rows), l);
          for (Eigen::Index i = 0; i < r.rows(); ++i) out.row(i) = grads[static_cast<std::size_t>(i)].transpose();
        }
        return out;
      },
      py::arg("reps"), py::arg("ml"));

  m.def("single_slice_gak", &single_slice_gak, py::arg("cos"), py::arg("delta") = 1.0,
        py::call_guard<py::gil_scoped_release>());
}
