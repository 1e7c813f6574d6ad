#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pulsepair/channelizer.hpp"
#include "pulsepair/io.hpp"
#include "pulsepair/pairing.hpp"
#include "pulsepair/pipeline.hpp"
#include "pulsepair/rfi_filters.hpp"
#include "pulsepair/skymodel.hpp"
#include "pulsepair/stats.hpp"

namespace py = pybind11;
namespace pp = pulsepair;

namespace {

pp::stats::CoincidenceParams coincidence_params(std::int64_t n_pairs, double df_min, double df_max, double tolerance,
                                                const std::string& mode, const std::vector<double>& targets,
                                                bool compare_magnitude) {
  pp::stats::CoincidenceParams c;
  c.n_pairs = n_pairs;
  c.df_min_hz = df_min;
  c.df_max_hz = df_max;
  c.tolerance_hz = tolerance;
  if (mode == "any_match_pair") {
    c.mode = pp::stats::CoincidenceMode::AnyMatchPair;
  } else if (mode == "target_match") {
    c.mode = pp::stats::CoincidenceMode::TargetMatch;
  } else {
    throw pp::ArgumentError("mode must be 'any_match_pair' or 'target_match'");
  }
  c.targets_hz = targets;
  c.compare_magnitude = compare_magnitude;
  return c;
}

}  // namespace

PYBIND11_MODULE(_pulsepair, m) {
  m.doc() = "Polarized pulse-pair simulator and binomial likelihood analysis";
  m.attr("__version__") = PULSEPAIR_VERSION;

  static py::exception<pp::ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const pp::ValidationError& e) {
      py::set_error(validation_error, e.what());
    }
  });

  py::enum_<pp::Polarization>(m, "Polarization").value("LCP", pp::Polarization::LCP).value("RCP", pp::Polarization::RCP);

  py::class_<pp::ThresholdEvent>(m, "ThresholdEvent")
      .def(py::init<>())
      .def(py::init([](double mjd, double freq, pp::Polarization pol, double snr) {
             return pp::ThresholdEvent{mjd, freq, pol, snr};
           }),
           py::arg("mjd"), py::arg("rf_freq_hz"), py::arg("pol"), py::arg("snr_db"))
      .def_readwrite("mjd", &pp::ThresholdEvent::mjd)
      .def_readwrite("rf_freq_hz", &pp::ThresholdEvent::rf_freq_hz)
      .def_readwrite("pol", &pp::ThresholdEvent::pol)
      .def_readwrite("snr_db", &pp::ThresholdEvent::snr_db)
      .def("__repr__", [](const pp::ThresholdEvent& e) { return "ThresholdEvent(" + pp::io::format_event(e) + ")"; });

  py::class_<pp::PulsePair>(m, "PulsePair")
      .def_readonly("lcp", &pp::PulsePair::lcp)
      .def_readonly("rcp", &pp::PulsePair::rcp)
      .def_readonly("dt_s", &pp::PulsePair::dt_s)
      .def_readonly("df_hz", &pp::PulsePair::df_hz)
      .def_readonly("snr_low_db", &pp::PulsePair::snr_low_db)
      .def_readonly("snr_high_db", &pp::PulsePair::snr_high_db)
      .def_readonly("ra_hours", &pp::PulsePair::ra_hours)
      .def_readonly("ref_frame", &pp::PulsePair::ref_frame)
      .def_readonly("interarrival_s", &pp::PulsePair::interarrival_s)
      .def_readonly("trial", &pp::PulsePair::trial);

  // stats
  m.def("binomial_density", &pp::stats::binomial_density, py::arg("k"), py::arg("n"), py::arg("p"));
  m.def("modal_count", &pp::stats::modal_count, py::arg("n"), py::arg("p"));
  m.def("normalized_likelihood", &pp::stats::normalized_likelihood, py::arg("k"), py::arg("n"), py::arg("p"));
  m.def("bayes_update", &pp::stats::bayes_update, py::arg("prior"), py::arg("likelihood_ratio"));
  m.def(
      "df_coincidence_mc",
      [](std::int64_t n_pairs, double df_min, double df_max, double tolerance, const std::string& mode,
         const std::vector<double>& targets, std::int64_t trials, std::uint64_t seed, bool compare_magnitude) {
        const auto c = coincidence_params(n_pairs, df_min, df_max, tolerance, mode, targets, compare_magnitude);
        pp::stats::McEstimate est;
        {
          py::gil_scoped_release release;
          est = pp::stats::df_coincidence_mc(c, trials, seed);
        }
        return py::make_tuple(est.probability, est.standard_error);
      },
      py::arg("n_pairs") = 14, py::arg("df_min") = 80.0, py::arg("df_max") = 1100.0, py::arg("tolerance") = 3.7,
      py::arg("mode") = "any_match_pair", py::arg("targets") = std::vector<double>{}, py::arg("trials") = 1000000,
      py::arg("seed") = 1, py::arg("compare_magnitude") = false,
      "Monte Carlo probability and its standard error.");
  m.def(
      "df_coincidence_analytic",
      [](std::int64_t n_pairs, double df_min, double df_max, double tolerance, const std::string& mode,
         const std::vector<double>& targets, bool compare_magnitude) {
        return pp::stats::df_coincidence_analytic(
            coincidence_params(n_pairs, df_min, df_max, tolerance, mode, targets, compare_magnitude));
      },
      py::arg("n_pairs") = 14, py::arg("df_min") = 80.0, py::arg("df_max") = 1100.0, py::arg("tolerance") = 3.7,
      py::arg("mode") = "any_match_pair", py::arg("targets") = std::vector<double>{},
      py::arg("compare_magnitude") = false);
  m.def(
      "uniformity_test",
      [](const std::vector<std::int64_t>& counts) {
        if (counts.size() != pp::sky::kRaBinCount) throw pp::ArgumentError("expected 80 counts");
        std::array<std::int64_t, pp::sky::kRaBinCount> a{};
        std::copy(counts.begin(), counts.end(), a.begin());
        const auto r = pp::stats::uniformity_test(a);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("counts"));

  // sky
  m.def("mjd_to_lst", &pp::sky::mjd_to_lst, py::arg("mjd"), py::arg("longitude_east_deg"));
  m.def(
      "ra_bin",
      [](double ra) {
        const auto b = pp::sky::ra_bin(ra);
        return py::make_tuple(b.index, b.lo_hours, b.hi_hours);
      },
      py::arg("ra_hours"));

  // filters
  m.def("near_clock_harmonic", &pp::near_clock_harmonic, py::arg("freq_hz"));
  m.def("harmonic_excise", &pp::harmonic_excise, py::arg("events"));

  // channelizer
  m.def(
      "power_spectrum",
      [](py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> samples) {
        if (samples.ndim() != 1) throw pp::ArgumentError("samples must be one-dimensional");
        std::vector<std::complex<double>> v(samples.data(), samples.data() + samples.size());
        pp::Channelizer ch(v.size());
        auto p = ch.power_spectrum(v);
        return py::array_t<double>(static_cast<py::ssize_t>(p.size()), p.data());
      },
      py::arg("samples"), "|DFT|^2 in ascending-frequency order (DC at len/2).");

  // pipeline
  m.def(
      "simulate_events",
      [](const std::string& scene_path, const std::string& config_path, std::optional<std::uint64_t> seed, bool iq) {
        const auto cfg = pp::pipeline::load_config_or_default(config_path, seed);
        pp::scene::SyntheticScene sc;
        if (!scene_path.empty()) sc = pp::scene::load_scene_file(scene_path);
        py::gil_scoped_release release;
        return pp::pipeline::simulate(sc, cfg, iq ? pp::pipeline::RenderPath::Iq : pp::pipeline::RenderPath::Events);
      },
      py::arg("scene_path") = "", py::arg("config_path") = "", py::arg("seed") = py::none(), py::arg("iq") = false);
  m.def(
      "process_events",
      [](const std::vector<pp::ThresholdEvent>& events, const std::string& config_path) {
        const auto cfg = pp::pipeline::load_config_or_default(config_path, std::nullopt);
        auto r = pp::pipeline::process_events(events, cfg, pp::RfiMask{});
        py::dict stages;
        for (const auto& s : r.stages) stages[py::str(s.name)] = s.events;
        return py::make_tuple(r.pairs, stages);
      },
      py::arg("events"), py::arg("config_path") = "",
      "Runs the filter chain; returns (trial-sorted pairs, surviving event count per stage).");
  m.def(
      "analyze_summary",
      [](const std::vector<pp::PulsePair>& pairs, double p, std::optional<double> prior) {
        const auto rep = pp::stats::analyze(pairs, p, prior);
        py::list rows;
        for (const auto& b : rep.bins) {
          py::dict row;
          row["bin"] = b.bin.index;
          row["min_density"] = b.min_density;
          row["n_at_min"] = b.n_at_min;
          row["k_at_min"] = b.k_at_min;
          row["normalized_likelihood"] = b.normalized_likelihood;
          row["posterior"] = b.posterior ? py::cast(*b.posterior) : py::none();
          row["direction"] = b.direction;
          rows.append(row);
        }
        return rows;
      },
      py::arg("pairs"), py::arg("p") = pp::stats::kDefaultEventProbability, py::arg("prior") = py::none());
  m.def("read_events", [](const std::filesystem::path& p) { return pp::io::read_events_file(p, true); }, py::arg("path"));
  m.def("read_pairs", &pp::io::read_pairs_file, py::arg("path"));
  m.def("selftest", &pp::pipeline::selftest);
}
