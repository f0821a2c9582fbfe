#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msc/bounds.hpp"
#include "msc/slsim.hpp"
#include "msc/sweep.hpp"
#include "msc/wire.hpp"

namespace py = pybind11;
using namespace msc;

namespace {

FeatureMap from_array(const py::array_t<float, py::array::c_style |
                                                   py::array::forcecast>& arr) {
  FeatureMap fm;
  if (arr.ndim() == 0) throw InputError("expected a non-scalar array");
  for (py::ssize_t i = 0; i < arr.ndim(); ++i)
    fm.shape.push_back(static_cast<std::uint32_t>(arr.shape(i)));
  fm.data.assign(arr.data(), arr.data() + arr.size());
  validate_feature_map(fm);
  return fm;
}

py::array_t<float> to_array(const FeatureMap& fm) {
  std::vector<py::ssize_t> shape(fm.shape.begin(), fm.shape.end());
  py::array_t<float> arr(shape);
  std::copy(fm.data.begin(), fm.data.end(), arr.mutable_data());
  return arr;
}

Codec codec_from_name(const std::string& name) {
  if (name == "ms") return Codec::MS;
  if (name == "sp") return Codec::SP;
  if (name == "qu") return Codec::QU;
  if (name == "rt") return Codec::RT;
  throw ParameterError("unknown codec name: " + name);
}

CodecConfig make_config(const std::string& codec, double r, std::uint32_t b,
                        std::uint32_t q, bool sign_bit, std::uint64_t seed,
                        bool stochastic_rounding) {
  CodecConfig cfg;
  cfg.codec = codec_from_name(codec);
  cfg.sparsification_ratio = r;
  cfg.mask_bits = b;
  cfg.quant_bits = q;
  cfg.sign_mode = sign_bit ? SignMode::SignBit : SignMode::NonNegativeOnly;
  cfg.seed = seed;
  cfg.stochastic_rounding = stochastic_rounding;
  return cfg;
}

py::dict report_to_dict(const DominanceReport& rep) {
  py::dict d;
  d["qu_bound"] = rep.qu;
  d["sp_bound"] = rep.sp;
  d["ms_bound"] = rep.ms;
  d["ms_vs_sp"] = rep.ms_vs_sp;
  d["ms_vs_qu"] = rep.ms_vs_qu;
  d["alpha_lt_half"] = rep.alpha_lt_half;
  d["k2_over_d"] = rep.k2_over_d;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mask-encoded sparsification codecs, bounds, wire format, and the "
            "split-learning simulator";

  py::register_exception<ParameterError>(m, "ParameterError",
                                         PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<CorruptPayloadError>(m, "CorruptPayloadError",
                                              PyExc_ValueError);
  py::register_exception<WireError>(m, "WireError", PyExc_ValueError);

  py::class_<CompressedPayload>(m, "Payload")
      .def_property_readonly(
          "codec", [](const CompressedPayload& p) { return to_string(p.codec); })
      .def_readonly("k", &CompressedPayload::k)
      .def_readonly("mask_bits", &CompressedPayload::mask_bits)
      .def_readonly("quant_bits", &CompressedPayload::quant_bits)
      .def_readonly("shape", &CompressedPayload::shape)
      .def_readonly("top_values", &CompressedPayload::top_values)
      .def_readonly("mask", &CompressedPayload::mask)
      .def_readonly("range_min", &CompressedPayload::range_min)
      .def_readonly("range_max", &CompressedPayload::range_max)
      .def_property_readonly(
          "sign_bit",
          [](const CompressedPayload& p) {
            return p.sign_mode == SignMode::SignBit;
          })
      .def("__repr__", [](const CompressedPayload& p) {
        return std::string("<Payload codec=") + to_string(p.codec) +
               " d=" + std::to_string(p.d()) + " k=" + std::to_string(p.k) +
               ">";
      });

  m.def(
      "encode",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>&
             x,
         const std::string& codec, double r, std::uint32_t b, std::uint32_t q,
         bool sign_bit, std::uint64_t seed, bool stochastic_rounding) {
        return encode(from_array(x),
                      make_config(codec, r, b, q, sign_bit, seed,
                                  stochastic_rounding));
      },
      py::arg("x"), py::arg("codec") = "ms", py::arg("r") = 0.99,
      py::arg("b") = 2, py::arg("q") = 3, py::arg("sign_bit") = false,
      py::arg("seed") = 0, py::arg("stochastic_rounding") = false,
      "Compress a float32 array with the chosen codec.");

  m.def(
      "decode", [](const CompressedPayload& p) { return to_array(decode(p)); },
      py::arg("payload"), "Reconstruct the feature map from a payload.");

  m.def(
      "serialize",
      [](const CompressedPayload& p) {
        const std::vector<std::uint8_t> bytes = serialize(p);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()),
                         bytes.size());
      },
      py::arg("payload"), "Bit-exact wire frame for a payload.");

  m.def(
      "deserialize",
      [](const py::bytes& raw) {
        const std::string_view view = raw;
        return deserialize(std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(view.data()), view.size()));
      },
      py::arg("frame"), "Parse a wire frame back into a payload.");

  m.def(
      "compression_error",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>&
             x,
         const py::array_t<float, py::array::c_style | py::array::forcecast>&
             xhat) {
        const ErrorReport rep =
            compression_error(from_array(x), from_array(xhat));
        py::dict d;
        d["abs_error"] = rep.abs_error;
        d["rel_error"] = rep.rel_error;
        return d;
      },
      py::arg("x"), py::arg("xhat"));

  m.def(
      "compression_rate",
      [](const std::string& codec, std::size_t d, double r, std::uint32_t b,
         std::uint32_t q, bool sign_bit) {
        return compression_rate(make_config(codec, r, b, q, sign_bit, 0, false),
                                d);
      },
      py::arg("codec"), py::arg("d"), py::arg("r") = 0.99, py::arg("b") = 2,
      py::arg("q") = 3, py::arg("sign_bit") = false,
      "1 - compressed_bits/(32*d), headers excluded.");

  m.def("l2_norm",
        [](const py::array_t<float, py::array::c_style |
                                        py::array::forcecast>& x) {
          return l2_norm(from_array(x));
        });

  m.def(
      "synthetic_activations",
      [](std::size_t d, std::uint64_t seed) {
        SeededRng rng(seed);
        return to_array(synthetic_activations(d, rng));
      },
      py::arg("d"), py::arg("seed") = 0,
      "Heavy-tailed post-ReLU synthetic feature map.");

  m.def("qu_bound", &qu_bound, py::arg("d"), py::arg("q1"),
        py::arg("norm_sq") = 1.0);
  m.def("sp_bound", &sp_bound, py::arg("d"), py::arg("k1"),
        py::arg("norm_sq") = 1.0);
  m.def("ms_bound", &ms_bound, py::arg("d"), py::arg("k2"), py::arg("q2"),
        py::arg("alpha"), py::arg("norm_sq") = 1.0);
  m.def(
      "compute_alpha",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>&
             x,
         std::size_t k) { return compute_alpha(from_array(x), k); },
      py::arg("x"), py::arg("k"));
  m.def(
      "dominance_report",
      [](std::uint64_t d, std::uint64_t k1, std::uint64_t k2, double q1,
         double q2, double alpha, double norm_sq) {
        BoundInputs in;
        in.d = d;
        in.k1 = k1;
        in.k2 = k2;
        in.q1 = q1;
        in.q2 = q2;
        in.alpha = alpha;
        in.norm_sq = norm_sq;
        return report_to_dict(dominance_report(in));
      },
      py::arg("d"), py::arg("k1"), py::arg("k2"), py::arg("q1"), py::arg("q2"),
      py::arg("alpha"), py::arg("norm_sq") = 1.0);

  m.def(
      "storage_cost",
      [](const std::string& scheme, std::uint64_t d, std::uint64_t k,
         std::uint32_t w, std::uint32_t f2) {
        const StorageScheme s = scheme == "mask" ? StorageScheme::Mask
                              : scheme == "keyvalue"
                                  ? StorageScheme::KeyValue
                                  : throw ParameterError(
                                        "scheme must be 'mask' or 'keyvalue'");
        return storage_cost(s, d, k, w, f2).bits;
      },
      py::arg("scheme"), py::arg("d"), py::arg("k"), py::arg("w") = 1,
      py::arg("f2") = 32);
  m.def("crossover_sparsity", &crossover_sparsity, py::arg("f2") = 32);

  m.def(
      "relu_bias_probe",
      [](std::size_t samples, std::uint64_t seed) {
        const BiasProbeReport rep = relu_bias_probe(samples, seed);
        py::dict d;
        d["samples"] = rep.samples;
        d["mc_estimate"] = rep.mc_estimate;
        d["relu_of_mean"] = rep.relu_of_mean;
        d["gap"] = rep.gap;
        return d;
      },
      py::arg("samples") = 1000000, py::arg("seed") = 1);

  m.def(
      "error_sweep",
      [](std::size_t d, const std::vector<std::pair<std::uint32_t,
                                                    std::uint32_t>>& points,
         std::size_t vectors, std::uint64_t seed, unsigned threads) {
        std::vector<RatePoint> pts;
        for (const auto& [b, k2] : points) pts.push_back({b, k2});
        py::list rows;
        for (const SweepRow& r :
             run_error_sweep(d, pts, vectors, seed, threads)) {
          py::dict row;
          row["codec"] = to_string(r.codec);
          row["compression_rate"] = r.compression_rate;
          row["mean_abs_error"] = r.mean_abs_error;
          row["std_abs_error"] = r.std_abs_error;
          row["d"] = r.d;
          row["seed_count"] = r.seed_count;
          rows.append(row);
        }
        return rows;
      },
      py::arg("d"), py::arg("points"), py::arg("vectors") = 30,
      py::arg("seed") = 42, py::arg("threads") = 1,
      "Matched-rate codec error comparison on synthetic feature maps.");

  m.def(
      "train",
      [](const std::string& task, std::uint32_t clients, std::uint32_t rounds,
         double learning_rate, std::uint64_t seed, std::uint32_t batch_size,
         std::uint32_t input_dim, std::uint32_t hidden_dim,
         std::uint32_t output_dim, double input_tail, double label_noise,
         const py::object& codec) {
        SimConfig cfg;
        cfg.task = task == "moons" ? Task::TwoClassMoons
                                   : Task::SyntheticRegression;
        cfg.n_clients = clients;
        cfg.rounds = rounds;
        cfg.learning_rate = learning_rate;
        cfg.seed = seed;
        cfg.batch_size = batch_size;
        cfg.input_dim = input_dim;
        cfg.hidden_dim = hidden_dim;
        cfg.output_dim = output_dim;
        cfg.input_tail = input_tail;
        cfg.label_noise = label_noise;
        if (!codec.is_none()) {
          const py::dict c = codec.cast<py::dict>();
          cfg.codec = make_config(
              c["codec"].cast<std::string>(),
              c.contains("r") ? c["r"].cast<double>() : 0.99,
              c.contains("b") ? c["b"].cast<std::uint32_t>() : 2,
              c.contains("q") ? c["q"].cast<std::uint32_t>() : 3,
              c.contains("sign_bit") ? c["sign_bit"].cast<bool>() : false,
              c.contains("seed") ? c["seed"].cast<std::uint64_t>() : 0, false);
        }
        const TrainingTrace trace = train(cfg);
        py::list rows;
        for (const RoundRecord& r : trace.rounds) {
          py::dict row;
          row["round"] = r.round;
          row["loss"] = r.loss;
          row["E"] = r.E;
          row["grad_gap_server"] = r.grad_gap_server;
          row["grad_gap_client"] = r.grad_gap_client;
          row["grad_norm"] = r.grad_norm;
          row["bytes_up"] = r.bytes_up;
          rows.append(row);
        }
        py::dict out;
        out["rounds"] = rows;
        out["diverged"] = trace.diverged;
        out["csv"] = trace_to_csv(trace);
        return out;
      },
      py::arg("task") = "regression", py::arg("clients") = 4,
      py::arg("rounds") = 400, py::arg("learning_rate") = 1e-3,
      py::arg("seed") = 1, py::arg("batch_size") = 64,
      py::arg("input_dim") = 8, py::arg("hidden_dim") = 64,
      py::arg("output_dim") = 1, py::arg("input_tail") = 1.25,
      py::arg("label_noise") = 0.4, py::arg("codec") = py::none(),
      "Deterministic multi-client split-learning simulation.");
}
