#pragma once

// Local HTTP JSON service over a review project. Every mutation is persisted before the reply.

#include "sleec/project.hpp"

#include "httplib.h"
#include "json.hpp"

#include <shared_mutex>

namespace sleec {

class Service {
public:
  Service(std::string project_path, Budget budget = {})
      : path_(std::move(project_path)), budget_(budget), state_(load_project(path_)) {}

  ProjectState snapshot() const {
    std::shared_lock lock(mu_);
    return state_;
  }

  void mount(httplib::Server& srv) {
    srv.Get("/project", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(serialize(snapshot()), "application/json");
    });

    srv.Get("/document", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, to_json(snapshot())["document"]);
    });

    srv.Post("/document", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      std::unique_lock lock(mu_);
      std::string text;
      if (body->contains("text")) {
        text = body->value("text", "");
      } else {
        std::ifstream in(state_.document_path);
        if (!in) return reply(res, 400, error("cannot read '" + state_.document_path + "'"));
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
      }
      try {
        replace_document(state_, text);
      } catch (const ParseError& e) {
        nlohmann::json j = error(e.what());
        j["line"] = e.line();
        j["column"] = e.column();
        j["span"] = span_json(e.span());
        return reply(res, 400, j);
      } catch (const std::exception& e) {
        return reply(res, 400, error(e.what()));
      }
      persist();
      reply(res, 200, to_json(state_)["document"]);
    });

    srv.Get("/relations", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"relations", to_json(snapshot())["relations"]}});
    });

    srv.Post("/relations/:id/verdict", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      const std::string id = req.path_params.at("id");
      std::unique_lock lock(mu_);
      if (!state_.find(id)) return reply(res, 404, error("no relation '" + id + "'"));
      try {
        set_verdict(state_, id, body->value("verdict", ""), body->value("note", ""));
      } catch (const std::exception& e) {
        return reply(res, 422, error(e.what()));
      }
      persist();
      reply(res, 200, to_json(*state_.find(id)));
    });

    srv.Post("/relations", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      std::unique_lock lock(mu_);
      try {
        const ProjectRelation& r = add_relation(state_, body->value("relation", ""), body->value("note", ""));
        nlohmann::json j = to_json(r);
        persist();
        reply(res, 201, j);
      } catch (const std::exception& e) {
        reply(res, 422, error(e.what()));
      }
    });

    srv.Post("/analyze", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      if (!body->contains("stage") || !(*body)["stage"].is_number_integer())
        return reply(res, 400, error("body needs an integer 'stage'"));
      const int stage = (*body)["stage"].get<int>();
      ProjectState snap = snapshot();
      if (std::string why = gate_refusal(snap, stage); !why.empty())
        return reply(res, stage < 1 || stage > 4 ? 400 : 409, error(why));
      HistoryEntry entry;
      try {
        entry = analyze(snap, stage, budget_);
      } catch (const std::exception& e) {
        return reply(res, 422, error(e.what()));
      }
      std::unique_lock lock(mu_);
      if (state_.revision != snap.revision)
        return reply(res, 409, error("the project changed while the analysis ran; analyse again"));
      state_.history.push_back(entry);
      persist();
      reply(res, 200, entry_json(entry));
    });

    srv.Get("/diagnoses", [this](const httplib::Request&, httplib::Response& res) {
      ProjectState snap = snapshot();
      nlohmann::json stages = nlohmann::json::array();
      for (int s = 1; s <= 4; ++s)
        if (const HistoryEntry* h = latest(snap, s)) stages.push_back(entry_json(*h));
      reply(res, 200, {{"revision", snap.revision}, {"stages", stages}});
    });
  }

private:
  static nlohmann::json error(const std::string& msg) { return {{"error", msg}}; }

  static void reply(httplib::Response& res, int status, const nlohmann::json& j) {
    res.status = status;
    res.set_content(j.dump(2) + "\n", "application/json");
  }

  static std::optional<nlohmann::json> parse_body(const httplib::Request& req, httplib::Response& res) {
    nlohmann::json j = req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      reply(res, 400, error("request body must be a JSON object"));
      return std::nullopt;
    }
    return j;
  }

  static nlohmann::json entry_json(const HistoryEntry& h) {
    return {{"stage", h.stage}, {"revision", h.revision}, {"timestamp", h.timestamp}, {"diagnoses", h.diagnoses}};
  }

  // caller holds the write lock
  void persist() { save_project(state_, path_); }

  std::string path_;
  Budget budget_;
  mutable std::shared_mutex mu_;
  ProjectState state_;
};

}  // namespace sleec
