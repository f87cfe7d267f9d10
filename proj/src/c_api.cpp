#include "tensegrity/tensegrity.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <new>
#include <string>

#include "tensegrity/pipeline.hpp"

using namespace tensegrity;

struct tg_model {
  TensegrityModel model;
};

struct tg_session {
  RunConfig config;
};

namespace {

thread_local std::string last_error;

tg_status from_code(ErrorCode code) {
  return static_cast<tg_status>(static_cast<int>(code) + 1);
}

template <typename F>
tg_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return TG_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return from_code(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return TG_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return TG_INTERNAL;
  }
}

tg_status null_pointer(const char* what) {
  last_error = std::string(what) + " is null";
  return TG_NULL_POINTER;
}

tg_status copy_out(const std::string& s, char* buf, size_t size, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf) {
    last_error.clear();
    return TG_OK;
  }
  if (size < s.size() + 1) {
    last_error = "buffer too small";
    return TG_BUFFER_TOO_SMALL;
  }
  std::memcpy(buf, s.data(), s.size());
  buf[s.size()] = '\0';
  last_error.clear();
  return TG_OK;
}

tg_margins margins_of(const DesignVerdict& v) {
  tg_margins m;
  m.string_yield = v.string_yield.margin;
  m.rod_yield = v.rod_yield.margin;
  m.rod_buckling = v.rod_buckling.margin;
  m.string_passed = v.string_yield.passed;
  m.rod_yield_passed = v.rod_yield.passed;
  m.rod_buckling_passed = v.rod_buckling.passed;
  return m;
}

}  // namespace

extern "C" {

const char* tg_status_string(tg_status status) {
  switch (status) {
    case TG_OK: return "ok";
    case TG_NULL_POINTER: return "null pointer";
    case TG_BUFFER_TOO_SMALL: return "buffer too small";
    default: break;
  }
  const int code = static_cast<int>(status) - 1;
  if (code >= 0 && code <= static_cast<int>(ErrorCode::Io)) {
    return to_string(static_cast<ErrorCode>(code));
  }
  return "unknown status";
}

const char* tg_last_error(void) { return last_error.c_str(); }

const char* tg_version(void) { return "0.1.0"; }

tg_status tg_model_create(double rod_length, tg_model** out) {
  if (!out) return null_pointer("out");
  *out = nullptr;
  return guarded([&] { *out = new tg_model{build_icosahedron(rod_length)}; });
}

void tg_model_destroy(tg_model* model) { delete model; }

tg_status tg_model_node(const tg_model* model, int node, double xyz[3]) {
  if (!model) return null_pointer("model");
  if (!xyz) return null_pointer("xyz");
  return guarded([&] {
    const Vec3& p = model->model.node(node);
    for (int i = 0; i < 3; ++i) xyz[i] = p[i];
  });
}

tg_status tg_model_face_nodes(const tg_model* model, int face, int nodes[3]) {
  if (!model) return null_pointer("model");
  if (!nodes) return null_pointer("nodes");
  return guarded([&] {
    const auto n = model->model.face_nodes(face);
    for (int i = 0; i < 3; ++i) nodes[i] = n[i];
  });
}

tg_status tg_model_face_normal(const tg_model* model, int face, double normal[3]) {
  if (!model) return null_pointer("model");
  if (!normal) return null_pointer("normal");
  return guarded([&] {
    const Vec3 v = model->model.face_inward_normal(face);
    for (int i = 0; i < 3; ++i) normal[i] = v[i];
  });
}

tg_status tg_model_face_strings(const tg_model* model, int face, int* strings) {
  if (!model) return null_pointer("model");
  if (!strings) return null_pointer("strings");
  return guarded([&] {
    *strings = model->model.face_kind(face) == FaceKind::ThreeString ? 3 : 2;
  });
}

tg_status tg_identify_face(const tg_model* model, double pitch, double roll, int* face) {
  if (!model) return null_pointer("model");
  if (!face) return null_pointer("face");
  return guarded([&] { *face = identify_contact_face(model->model, pitch, roll); });
}

tg_status tg_session_create(const char* config_json, tg_session** out) {
  if (!out) return null_pointer("out");
  *out = nullptr;
  if (!config_json) return null_pointer("config_json");
  return guarded([&] { *out = new tg_session{parse_config(config_json)}; });
}

tg_status tg_session_create_from_file(const char* path, tg_session** out) {
  if (!out) return null_pointer("out");
  *out = nullptr;
  if (!path) return null_pointer("path");
  return guarded([&] { *out = new tg_session{load_config(path)}; });
}

tg_status tg_session_create_default(tg_session** out) {
  if (!out) return null_pointer("out");
  *out = nullptr;
  return guarded([&] { *out = new tg_session{RunConfig{}}; });
}

void tg_session_destroy(tg_session* session) { delete session; }

tg_status tg_session_set_seed(tg_session* session, uint64_t seed) {
  if (!session) return null_pointer("session");
  return guarded([&] { session->config.simulation.seed = seed; });
}

tg_status tg_session_set_output_dir(tg_session* session, const char* dir) {
  if (!session) return null_pointer("session");
  if (!dir) return null_pointer("dir");
  return guarded([&] {
    if (!*dir) fail(ErrorCode::InvalidArgument, "output directory must not be empty");
    session->config.output_dir = dir;
  });
}

tg_status tg_session_config_hash(const tg_session* session, char* buf, size_t size,
                                 size_t* needed) {
  if (!session) return null_pointer("session");
  std::string s;
  const tg_status st = guarded([&] { s = config_hash(session->config); });
  return st == TG_OK ? copy_out(s, buf, size, needed) : st;
}

tg_status tg_session_config_json(const tg_session* session, char* buf, size_t size,
                                 size_t* needed) {
  if (!session) return null_pointer("session");
  std::string s;
  const tg_status st = guarded([&] { s = config_to_json(session->config); });
  return st == TG_OK ? copy_out(s, buf, size, needed) : st;
}

tg_status tg_session_output_dir(const tg_session* session, char* buf, size_t size,
                                size_t* needed) {
  if (!session) return null_pointer("session");
  return copy_out(session->config.output_dir, buf, size, needed);
}

tg_status tg_analyze(tg_session* session, tg_analysis* out) {
  if (!session) return null_pointer("session");
  if (!out) return null_pointer("out");
  return guarded([&] {
    const auto r = cmd_analyze(session->config);
    write_outputs(session->config.output_dir, r.files);
    out->total_force = r.total_force;
    out->max_tension = r.sweep.max_tension;
    out->max_compression = r.sweep.max_compression;
    out->buckling_stress = r.verdict.buckling_stress;
    out->cases = static_cast<int>(r.sweep.cases.size());
    out->passed = r.verdict.passed();
    out->margins = margins_of(r.verdict);
  });
}

tg_status tg_plan(tg_session* session, int start_face, tg_plan_summary* out) {
  if (!session) return null_pointer("session");
  if (!out) return null_pointer("out");
  return guarded([&] {
    const auto r = cmd_plan(session->config, start_face);
    write_outputs(session->config.output_dir, r.files);
    const auto faces = r.plan.faces();
    *out = tg_plan_summary{};
    out->start = r.plan.start;
    out->steps = static_cast<int>(r.plan.steps.size());
    out->cost = r.plan.cost;
    out->face_count = static_cast<int>(faces.size());
    for (size_t i = 0; i < faces.size() && i < 32; ++i) out->faces[i] = faces[i];
  });
}

tg_status tg_scenario_from_name(const char* name, tg_scenario* out) {
  if (!name) return null_pointer("name");
  if (!out) return null_pointer("out");
  return guarded([&] { *out = static_cast<tg_scenario>(parse_scenario(name)); });
}

tg_status tg_simulate(tg_session* session, tg_scenario scenario, int start_face,
                      tg_sim_summary* out) {
  if (!session) return null_pointer("session");
  if (!out) return null_pointer("out");
  return guarded([&] {
    if (scenario < TG_SCENARIO_REORIENT || scenario > TG_SCENARIO_MONTE_CARLO) {
      fail(ErrorCode::InvalidArgument, "unknown scenario");
    }
    const auto r = cmd_simulate(session->config, static_cast<Scenario>(scenario), start_face);
    write_outputs(session->config.output_dir, r.files);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    *out = tg_sim_summary{};
    out->scenario = scenario;
    out->ok = r.ok;
    out->damping = nan;
    out->damping_point_mass = nan;
    if (r.reorientation) {
      const auto& x = *r.reorientation;
      out->reached = x.reached;
      out->followed_plan = x.contacts == x.initial_plan.faces();
      out->time = x.time;
      out->replans = x.replans;
      out->max_thrust_while_cut = x.max_thrust_while_cut;
    }
    if (r.monte_carlo) {
      out->trials = r.monte_carlo->trials;
      out->trials_reached = r.monte_carlo->reached;
    }
    if (r.damping) out->damping = *r.damping;
    if (r.damping_point_mass) out->damping_point_mass = *r.damping_point_mass;
    if (r.wall_impact) {
      out->impact_force = r.wall_impact->force;
      out->verdict_passed = r.wall_impact->verdict.passed();
      out->margins = margins_of(r.wall_impact->verdict);
    }
  });
}

tg_status tg_report(tg_session* session, int* files_written) {
  if (!session) return null_pointer("session");
  return guarded([&] {
    const auto files = cmd_report(session->config);
    write_outputs(session->config.output_dir, files);
    if (files_written) *files_written = static_cast<int>(files.size());
  });
}

tg_status tg_estimate_impact_force(double mass, double speed, double stopping_distance,
                                   double* force) {
  if (!force) return null_pointer("force");
  return guarded([&] { *force = estimate_impact_force(mass, speed, stopping_distance); });
}

}  // extern "C"
