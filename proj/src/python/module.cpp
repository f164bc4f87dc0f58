// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

// Python bindings. Structured values cross the boundary as plain dicts in the
// same shape as the JSON APIs; clips cross as EMV1 container bytes.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "emf/core/canonical.hpp"
#include "emf/core/container.hpp"
#include "emf/core/json.hpp"
#include "emf/error.hpp"
#include "emf/gate/gate.hpp"
#include "emf/merge/merger.hpp"
#include "emf/metrics/metrics.hpp"
#include "emf/orchestrator/experiment.hpp"
#include "emf/orchestrator/orchestrator.hpp"
#include "emf/orchestrator/pool.hpp"
#include "emf/protocol/link.hpp"
#include "emf/protocol/message.hpp"
#include "emf/protocol/mock_expert.hpp"

namespace py = pybind11;
using namespace emf;

namespace {

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::handle& obj) {
    if (obj.is_none()) return Json();
    return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

GenerationParams params_from(const py::object& obj) {
    // Missing fields keep their defaults.
    Json merged = GenerationParams{};
    if (!obj.is_none()) merged.update(from_py(obj));
    GenerationParams p = merged.get<GenerationParams>();
    p.validate();
    return p;
}

std::vector<std::uint8_t> bytes_of(const py::bytes& b) {
    const std::string s = b;
    return {s.begin(), s.end()};
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
    return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

PromptSpec prompt_of(const std::string& text, const std::vector<std::string>& subjects, const py::object& params) {
    PromptSpec p;
    p.text = text;
    p.declared_subjects = subjects;
    p.params = params_from(params);
    return p;
}

py::object clip_summary(const VideoClip& c) {
    Json tracks = Json::array();
    for (const auto& t : c.tracks) tracks.push_back(t);
    Json prov = Json::array();
    for (const auto& p : c.provenance) prov.push_back(p);
    return to_py(Json{{"params", c.params}, {"tracks", tracks}, {"provenance", prov}});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Mixture-of-experts video generation core: gate, codecs, merger, metrics and experiments";

    static py::exception<Error> error_type(m, "EmfError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object inst = py::reinterpret_borrow<py::object>(error_type.ptr())(std::string(e.what()));
            inst.attr("code") = std::string(to_string(e.code()));
            inst.attr("offset") = e.offset() ? py::cast(*e.offset()) : py::none();
            PyErr_SetObject(error_type.ptr(), inst.ptr());
        } catch (const Json::exception& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("canonicalize", [](const std::string& text) { return canonicalize_prompt(text); },
          "Canonical form of a prompt: lowercase words separated by single spaces.", py::arg("text"));

    m.def("cache_key", [](const std::string& text, const py::object& params) {
              return cache_key(text, params_from(params)).hex();
          },
          "Hex SHA-256 subtask key of a sub-prompt and generation params.", py::arg("text"),
          py::arg("params") = py::none());

    m.def("classify", [](const std::string& text) { return std::string(to_string(gate::classify_text(text))); },
          "Task kind of a prompt: atomic, temporal or spatial.", py::arg("text"));

    m.def("plan_prompt",
          [](const std::string& text, const std::vector<std::string>& subjects, const py::object& params) {
              return to_py(gate::plan_prompt(prompt_of(text, subjects, params)));
          },
          "Rule-based decomposition plan of a prompt.", py::arg("text"),
          py::arg("subjects") = std::vector<std::string>{}, py::arg("params") = py::none());

    m.def("mock_generate",
          [](const std::string& sub_prompt, const py::object& params) {
              return to_bytes(encode_clip(protocol::mock_generate(sub_prompt, params_from(params))));
          },
          "Procedural expert clip for a sub-prompt, as EMV1 bytes.", py::arg("sub_prompt"),
          py::arg("params") = py::none());

    m.def("decode_clip", [](const py::bytes& data) { return clip_summary(decode_clip(bytes_of(data))); },
          "Params, tracks and provenance of an EMV1 container.", py::arg("data"));

    m.def("clip_frames",
          [](const py::bytes& data) {
              const auto c = decode_clip(bytes_of(data));
              py::list out;
              for (const auto& f : c.frames) out.append(to_bytes(f.pixels));
              return out;
          },
          "Raw RGB24 frames of an EMV1 container.", py::arg("data"));

    m.def("encode_clip",
          [](const py::dict& header, const std::vector<py::bytes>& frames) {
              VideoClip c;
              const Json h = from_py(header);
              c.params = h.at("params").get<GenerationParams>();
              if (h.contains("tracks")) c.tracks = h.at("tracks").get<std::vector<SubjectTrack>>();
              if (h.contains("provenance")) c.provenance = h.at("provenance").get<std::vector<Provenance>>();
              for (const auto& f : frames) c.frames.push_back(Frame{bytes_of(f)});
              return to_bytes(encode_clip(c));
          },
          "EMV1 container from {params, tracks?, provenance?} and raw RGB24 frames.", py::arg("header"),
          py::arg("frames"));

    m.def("merge",
          [](const py::dict& plan, const std::vector<py::bytes>& clips, std::uint32_t crossfade_frames) {
              const auto p = from_py(plan).get<DecompositionPlan>();
              if (p.subtasks.size() != clips.size()) fail(ErrorCode::InvalidArgument, "one clip per subtask is required");
              merge::MergePlan mp;
              mp.strategy = p.kind;
              mp.crossfade_frames = crossfade_frames;
              for (std::size_t i = 0; i < clips.size(); ++i) {
                  mp.inputs.push_back(merge::MergeInput{p.subtasks[i], decode_clip(bytes_of(clips[i]))});
              }
              return to_bytes(encode_clip(merge::merge(mp)));
          },
          "Merge one clip per plan subtask with the plan's strategy; returns EMV1 bytes.", py::arg("plan"),
          py::arg("clips"), py::arg("crossfade_frames") = 0);

    m.def("evaluate",
          [](const py::bytes& clip, const std::string& prompt, const std::vector<std::string>& subjects) {
              const auto c = decode_clip(bytes_of(clip));
              return to_py(metrics::evaluate(c, prompt_of(prompt, subjects, py::none())));
          },
          "Four quality scores and their mean for a clip and its prompt.", py::arg("clip"), py::arg("prompt"),
          py::arg("subjects") = std::vector<std::string>{});

    m.def("transfer_time_ms",
          [](std::uint64_t bytes, std::uint64_t latency_ms, std::uint64_t bandwidth_bps) {
              protocol::LinkParams link{latency_ms, bandwidth_bps, 0.0, 0};
              link.validate();
              return protocol::transfer_time_ms(bytes, link);
          },
          "Delivery time of a transfer: latency + ceil(1000 * bytes / bandwidth).", py::arg("bytes"),
          py::arg("latency_ms"), py::arg("bandwidth_bps"));

    m.def("simulate_transfers",
          [](const std::vector<std::uint64_t>& sizes, std::uint64_t latency_ms, std::uint64_t bandwidth_bps,
             double drop_probability, std::uint64_t seed) {
              protocol::LinkParams link{latency_ms, bandwidth_bps, drop_probability, seed};
              link.validate();
              protocol::LinkSimulator sim(link);
              py::list out;
              for (auto n : sizes) {
                  const auto o = sim.transfer(n);
                  out.append(o.delivered ? py::cast(o.elapsed_ms) : py::none());
              }
              return out;
          },
          "Seeded link simulation; elapsed ms per transfer, None when dropped.", py::arg("sizes"),
          py::arg("latency_ms") = 20, py::arg("bandwidth_bps") = 10'000'000, py::arg("drop_probability") = 0.0,
          py::arg("seed") = 0);

    m.def("encode_message",
          [](const std::string& type, const std::string& request_id, const py::object& body, const py::bytes& payload) {
              protocol::Message msg{protocol::parse_message_type(type), request_id,
                                    body.is_none() ? Json::object() : from_py(body), bytes_of(payload)};
              return to_bytes(protocol::encode_message(msg));
          },
          "Length-prefixed wire frame of one protocol message.", py::arg("type"), py::arg("request_id") = "",
          py::arg("body") = py::none(), py::arg("payload") = py::bytes());

    m.def("decode_message",
          [](const py::bytes& data) {
              const auto raw = bytes_of(data);
              const auto msg = protocol::decode_message(raw);
              py::dict out;
              out["type"] = std::string(protocol::to_string(msg.type));
              out["request_id"] = msg.request_id;
              out["body"] = to_py(msg.body);
              out["payload"] = to_bytes(msg.payload);
              return out;
          },
          "Parse one complete wire frame.", py::arg("data"));

    m.def("run_experiment",
          [](const std::string& corpus, const std::vector<std::string>& modes, std::uint64_t seed,
             std::uint32_t trials, std::size_t lanes, std::size_t workers, const py::object& params) {
              orchestrator::ExperimentSpec spec;
              spec.corpus = orchestrator::parse_corpus(corpus, params_from(params));
              spec.modes.clear();
              for (const auto& mode : modes) spec.modes.push_back(orchestrator::parse_pipeline_mode(mode));
              spec.seed = seed;
              spec.trials = trials;
              spec.lanes = lanes;
              spec.validate();
              if (workers == 0) fail(ErrorCode::InvalidArgument, "workers must be at least 1");
              orchestrator::ExperimentReport report;
              {
                  py::gil_scoped_release release;
                  registry::Registry reg;
                  orchestrator::ExpertPool pool(reg);
                  orchestrator::LocalCluster cluster(pool, orchestrator::LocalCluster::mock_specs(workers));
                  orchestrator::Journal journal;
                  orchestrator::Orchestrator orch({}, pool, journal);
                  report = orchestrator::run_experiment(spec, orch);
                  cluster.shutdown();
              }
              py::dict out = to_py(report.to_json());
              out["table"] = report.to_table();
              return out;
          },
          "Run a merge-strategy experiment on in-process mock experts. The corpus is one prompt per line.",
          py::arg("corpus"), py::arg("modes") = std::vector<std::string>{"correct", "mismatch", "single"},
          py::arg("seed") = 0, py::arg("trials") = 1, py::arg("lanes") = 1, py::arg("workers") = 3,
          py::arg("params") = py::none());
}
