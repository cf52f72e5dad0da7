#include "tgr/stub_service.hpp"

#include <map>
#include <regex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tgr/errors.hpp"

namespace tgr {
namespace {

struct EpisodeState {
  std::shared_ptr<const World> world;
  std::unique_ptr<WorldFrames> frames;
  BackendSet oracle;
};

struct Ref {
  std::string episode;
  int frame = 0;
};

Ref parse_ref(const std::string& ref) {
  const auto pos = ref.rfind('#');
  if (pos == std::string::npos) throw Error("malformed frame ref: " + ref);
  return {ref.substr(0, pos), std::stoi(ref.substr(pos + 1))};
}

std::string match_line(const std::string& text, const std::regex& re) {
  std::smatch m;
  if (!std::regex_search(text, m, re)) return "";
  return m[1].str();
}

}  // namespace

struct StubService::Impl {
  explicit Impl(Corpus c, OracleOptions opts) : corpus(std::move(c)) {
    for (const auto& ep : corpus.episodes) {
      EpisodeState state;
      state.world = std::make_shared<World>(World::compile(ep.script));
      state.frames = std::make_unique<WorldFrames>(ep.id, state.world);
      state.oracle = make_oracle_backends(state.world, opts);
      episodes.emplace(ep.id, std::move(state));
    }
  }

  EpisodeState& state_for(const std::string& episode_id) {
    auto it = episodes.find(episode_id);
    if (it == episodes.end()) throw Error("stub knows no episode " + episode_id);
    return it->second;
  }

  std::string answer_chat(const nlohmann::json& body);

  Corpus corpus;
  std::map<std::string, EpisodeState> episodes;
};

std::string StubService::Impl::answer_chat(const nlohmann::json& body) {
  std::string prompt;
  std::vector<int> sample;
  std::string episode_id;
  for (const auto& item : body.at("messages").at(0).at("content")) {
    const std::string type = item.at("type").get<std::string>();
    if (type == "text" && prompt.empty()) {
      prompt = item.at("text").get<std::string>();
    } else if (type == "image_ref") {
      const Ref ref = parse_ref(item.at("image_ref").get<std::string>());
      episode_id = ref.episode;
      sample.push_back(ref.frame);
    }
  }
  const std::string task = match_line(prompt, std::regex("Task: ([^\\n.]+)"));

  if (task == "parse instruction") {
    const std::string instruction = match_line(prompt, std::regex("Instruction: ([^\\n]+)"));
    OracleTemporalParser parser;
    return nlohmann::json(parser.parse(instruction)).dump();
  }

  EpisodeState& state = state_for(episode_id);
  const std::string question = match_line(prompt, std::regex("Question: ([^\\n]+)"));

  if (task == "localize event") {
    const Timestamp k = state.oracle.localizer->localize(*state.frames, question);
    return "The event takes place at the " + std::to_string(k.seconds) + "th second.";
  }
  if (task == "identify object class") {
    return state.oracle.detector->identify_class(*state.frames, sample, question);
  }
  if (task == "select option") {
    // Reconstruct the options from their serialized descriptions.
    std::vector<GroundedOption> options;
    const std::regex line("Object (\\d+): ([^\\n]*) at (\\[[^\\]]*\\])");
    for (auto it = std::sregex_iterator(prompt.begin(), prompt.end(), line);
         it != std::sregex_iterator(); ++it) {
      GroundedOption opt;
      opt.label = std::stoi((*it)[1].str());
      const nlohmann::json coords = nlohmann::json::parse((*it)[3].str());
      opt.box = {coords[0].get<double>(), coords[1].get<double>(), coords[2].get<double>(),
                 coords[3].get<double>()};
      opt.description = (*it)[0].str();
      options.push_back(std::move(opt));
    }
    const int label = state.oracle.detector->select_option(*state.frames, sample, question, options);
    return "Object " + std::to_string(label);
  }
  if (task == "describe target") {
    return state.oracle.detector->describe_target(*state.frames, question);
  }
  if (task == "refine description") {
    const std::string previous = match_line(prompt, std::regex("Previous description: ([^\\n]+)"));
    return state.oracle.detector->refine_description(*state.frames, question, previous);
  }
  throw Error("stub cannot answer task \"" + task + "\"");
}

StubService::StubService(Corpus corpus, OracleOptions oracle_options)
    : impl_(std::make_unique<Impl>(std::move(corpus), oracle_options)) {}

StubService::~StubService() = default;

void StubService::attach(httplib::Server& server) {
  Impl* impl = impl_.get();

  server.Post("/v1/chat/completions", [impl](const httplib::Request& req, httplib::Response& res) {
    try {
      const nlohmann::json body = nlohmann::json::parse(req.body);
      const std::string content = impl->answer_chat(body);
      const nlohmann::json reply{
          {"choices", nlohmann::json::array({nlohmann::json{
                          {"message", {{"role", "assistant"}, {"content", content}}}}})}};
      res.set_content(reply.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 422;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
    }
  });

  server.Post("/v1/ground", [impl](const httplib::Request& req, httplib::Response& res) {
    try {
      const nlohmann::json body = nlohmann::json::parse(req.body);
      const Ref ref = parse_ref(body.at("image_ref").get<std::string>());
      EpisodeState& state = impl->state_for(ref.episode);
      const auto boxes = state.oracle.grounder->ground(*state.frames, ref.frame,
                                                       body.at("phrase").get<std::string>());
      nlohmann::json out = nlohmann::json::array();
      for (const auto& b : boxes) out.push_back({b.x_min, b.y_min, b.x_max, b.y_max});
      res.set_content(nlohmann::json{{"boxes", std::move(out)}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 422;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
    }
  });

  server.Post("/v1/track", [impl](const httplib::Request& req, httplib::Response& res) {
    try {
      const nlohmann::json body = nlohmann::json::parse(req.body);
      const auto& refs = body.at("frame_refs");
      if (refs.empty()) throw Error("track request without frames");
      const Ref first = parse_ref(refs.front().get<std::string>());
      const Ref last = parse_ref(refs.back().get<std::string>());
      EpisodeState& state = impl->state_for(first.episode);
      const auto& ib = body.at("init_box");
      const BoundingBox init{ib[0].get<double>(), ib[1].get<double>(), ib[2].get<double>(),
                             ib[3].get<double>()};
      const TrackOutcome outcome =
          state.oracle.tracker->track(*state.frames, {first.frame, last.frame + 1}, init);
      nlohmann::json boxes = nlohmann::json::array();
      for (const auto& b : outcome.boxes) boxes.push_back({b.x_min, b.y_min, b.x_max, b.y_max});
      nlohmann::json reply{{"boxes", std::move(boxes)},
                           {"lost_at", outcome.completed ? nlohmann::json()
                                                         : nlohmann::json(outcome.lost_at)}};
      res.set_content(reply.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 422;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
    }
  });
}

struct StubServer::Impl {
  explicit Impl(Corpus corpus, OracleOptions opts) : service(std::move(corpus), opts) {}
  StubService service;
  httplib::Server server;
  std::thread thread;
};

StubServer::StubServer(Corpus corpus, OracleOptions oracle_options, const std::string& host)
    : impl_(std::make_unique<Impl>(std::move(corpus), oracle_options)) {
  impl_->service.attach(impl_->server);
  port_ = impl_->server.bind_to_any_port(host);
  if (port_ <= 0) throw Error("stub server could not bind a port on " + host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

StubServer::~StubServer() {
  if (impl_) {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
  }
}

std::string StubServer::endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

}  // namespace tgr
