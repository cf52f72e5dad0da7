#include "tgr/remote.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

#include <httplib.h>

#include "tgr/errors.hpp"

namespace tgr {

RemoteConfig RemoteConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read endpoint config: " + path.string());
  nlohmann::json j;
  in >> j;
  RemoteConfig cfg;
  cfg.endpoint = j.value("endpoint", "");
  if (j.contains("models")) {
    for (const auto& [role, model] : j.at("models").items()) {
      cfg.models[role] = model.get<std::string>();
    }
  }
  cfg.timeout_ms = j.value("timeout_ms", cfg.timeout_ms);
  cfg.max_retries = j.value("max_retries", cfg.max_retries);
  cfg.backoff_ms = j.value("backoff_ms", cfg.backoff_ms);
  cfg.apply_environment();
  return cfg;
}

RemoteConfig RemoteConfig::from_environment() {
  RemoteConfig cfg;
  cfg.apply_environment();
  if (cfg.endpoint.empty()) {
    throw ValidationError("remote backend needs TGR_ENDPOINT or an endpoint config file");
  }
  return cfg;
}

void RemoteConfig::apply_environment() {
  if (const char* ep = std::getenv("TGR_ENDPOINT")) endpoint = ep;
}

// --- wire shapes --------------------------------------------------------------

nlohmann::json build_chat_request(const std::string& model, const std::string& prompt,
                                  const std::vector<std::string>& image_refs) {
  nlohmann::json content = nlohmann::json::array();
  content.push_back({{"type", "text"}, {"text", prompt}});
  for (const auto& ref : image_refs) {
    content.push_back({{"type", "image_ref"}, {"image_ref", ref}});
  }
  return nlohmann::json{
      {"model", model},
      {"messages", nlohmann::json::array({nlohmann::json{
                       {"role", "user"}, {"content", std::move(content)}}})}};
}

nlohmann::json build_ground_request(const std::string& image_ref, const std::string& phrase) {
  return nlohmann::json{{"image_ref", image_ref}, {"phrase", phrase}};
}

nlohmann::json build_track_request(const std::vector<std::string>& frame_refs,
                                   const BoundingBox& init_box) {
  return nlohmann::json{
      {"frame_refs", frame_refs},
      {"init_box", {init_box.x_min, init_box.y_min, init_box.x_max, init_box.y_max}}};
}

std::string prompt_parse(const std::string& instruction) {
  return "Task: parse instruction.\nInstruction: " + instruction +
         "\nReply as JSON with keys temporal_question, object_question, action.";
}

std::string prompt_localize(const std::string& temporal_question) {
  return "Task: localize event.\nQuestion: " + temporal_question +
         "\nReply with the second at which the event occurs, e.g. \"second 12\".";
}

std::string prompt_identify_class(const std::string& object_question) {
  return "Task: identify object class.\nQuestion: " + object_question +
         "\nReply with the class noun only.";
}

std::string prompt_select_option(const std::string& object_question,
                                 const std::vector<GroundedOption>& options) {
  std::string prompt = "Task: select option.\nQuestion: " + object_question + "\nOptions:\n";
  for (const auto& opt : options) prompt += opt.description + "\n";
  prompt += "Reply with the number of the chosen object.";
  return prompt;
}

std::string prompt_describe(const std::string& object_question) {
  return "Task: describe target.\nQuestion: " + object_question +
         "\nReply with a short description of the intended object.";
}

std::string prompt_refine(const std::string& object_question, const std::string& previous) {
  return "Task: refine description.\nQuestion: " + object_question +
         "\nPrevious description: " + previous +
         "\nThe description matched several objects; reply with a more specific one.";
}

// --- extractors ---------------------------------------------------------------

std::optional<int> extract_first_integer(const std::string& text) {
  static const std::regex re("-?\\d+");
  std::smatch m;
  if (std::regex_search(text, m, re)) return std::stoi(m.str());
  return std::nullopt;
}

std::optional<int> extract_timestamp_seconds(const std::string& text) {
  static const std::regex second_n("second\\s+(\\d+)", std::regex::icase);
  static const std::regex ns("(\\d+)\\s*s\\b");
  static const std::regex nth("(\\d+)(?:st|nd|rd|th)?\\s+second", std::regex::icase);
  std::smatch m;
  if (std::regex_search(text, m, second_n)) return std::stoi(m[1].str());
  if (std::regex_search(text, m, nth)) return std::stoi(m[1].str());
  if (std::regex_search(text, m, ns)) return std::stoi(m[1].str());
  return extract_first_integer(text);
}

std::optional<ParsedInstruction> extract_parsed(const std::string& text) {
  // Preferred form: a JSON object, possibly surrounded by prose.
  const auto open = text.find('{');
  const auto close = text.rfind('}');
  if (open != std::string::npos && close != std::string::npos && close > open) {
    const auto j = nlohmann::json::parse(text.substr(open, close - open + 1), nullptr, false);
    if (j.is_object() && j.contains("temporal_question") && j.contains("object_question") &&
        j.contains("action")) {
      ParsedInstruction p;
      p.temporal_question = j.at("temporal_question").get<std::string>();
      p.object_question = j.at("object_question").get<std::string>();
      p.action = j.at("action").get<std::string>();
      return p;
    }
  }
  // Fallback: labeled lines.
  static const std::regex tq("Temporal question:\\s*(.+)");
  static const std::regex oq("Object question:\\s*(.+)");
  static const std::regex act("Action:\\s*(.+)");
  std::smatch m1, m2, m3;
  if (std::regex_search(text, m1, tq) && std::regex_search(text, m2, oq) &&
      std::regex_search(text, m3, act)) {
    return ParsedInstruction{m1[1].str(), m2[1].str(), m3[1].str()};
  }
  return std::nullopt;
}

// --- HTTP client ---------------------------------------------------------------

namespace {

class RemoteClient {
 public:
  explicit RemoteClient(RemoteConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) {
      throw ValidationError("remote backend configured without an endpoint");
    }
  }

  nlohmann::json post(const std::string& path, const nlohmann::json& body, Stage stage) {
    const std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms * attempt));
      }
      httplib::Client client(config_.endpoint);
      client.set_connection_timeout(0, config_.timeout_ms * 1000);
      client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
      httplib::Headers headers;
      if (const char* key = std::getenv("TGR_API_KEY")) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }
      auto res = client.Post(path, headers, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "server error: HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw StageError(stage, "remote replied HTTP " + std::to_string(res->status));
      }
      const auto j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded()) throw StageError(stage, "remote replied non-JSON body");
      return j;
    }
    throw StageError(stage, "remote unreachable after " +
                                std::to_string(config_.max_retries + 1) + " attempts: " +
                                last_error);
  }

  std::string chat(const std::string& role, const std::string& prompt,
                   const std::vector<std::string>& image_refs, Stage stage) {
    const auto it = config_.models.find(role);
    const std::string model = it == config_.models.end() ? role : it->second;
    const nlohmann::json reply =
        post("/v1/chat/completions", build_chat_request(model, prompt, image_refs), stage);
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw StageError(stage, "malformed chat reply: no first choice text");
    }
  }

  const RemoteConfig& config() const { return config_; }

 private:
  RemoteConfig config_;
};

std::vector<std::string> refs_for(const FrameSource& frames, const std::vector<int>& sample) {
  std::vector<std::string> refs;
  refs.reserve(sample.size());
  for (int f : sample) refs.push_back(frames.frame_ref(f));
  return refs;
}

std::vector<std::string> refs_for_all(const FrameSource& frames) {
  std::vector<std::string> refs;
  refs.reserve(static_cast<size_t>(frames.frame_count()));
  for (int f = 0; f < frames.frame_count(); ++f) refs.push_back(frames.frame_ref(f));
  return refs;
}

class RemoteParser : public TemporalParser {
 public:
  explicit RemoteParser(std::shared_ptr<RemoteClient> client) : client_(std::move(client)) {}
  ParsedInstruction parse(const std::string& instruction) override {
    if (instruction.empty()) throw StageError(Stage::TemporalParser, "empty instruction");
    const std::string reply =
        client_->chat("parser", prompt_parse(instruction), {}, Stage::TemporalParser);
    auto parsed = extract_parsed(reply);
    if (!parsed) {
      throw StageError(Stage::TemporalParser, "malformed model reply: no parse triple in \"" +
                                                  reply + "\"");
    }
    return *parsed;
  }

 private:
  std::shared_ptr<RemoteClient> client_;
};

class RemoteLocalizer : public EventLocalizer {
 public:
  explicit RemoteLocalizer(std::shared_ptr<RemoteClient> client) : client_(std::move(client)) {}
  Timestamp localize(const FrameSource& frames, const std::string& tq) override {
    const std::string reply = client_->chat("localizer", prompt_localize(tq),
                                            refs_for_all(frames), Stage::EventLocalizer);
    auto seconds = extract_timestamp_seconds(reply);
    if (!seconds) {
      throw StageError(Stage::EventLocalizer, "no timestamp in model reply: \"" + reply + "\"");
    }
    if (*seconds < 0 || *seconds > frames.meta().duration_s) {
      throw StageError(Stage::EventLocalizer,
                       "model instant " + std::to_string(*seconds) + " outside the episode");
    }
    return Timestamp{*seconds};
  }

 private:
  std::shared_ptr<RemoteClient> client_;
};

class RemoteDetector : public TargetDetectorModel {
 public:
  explicit RemoteDetector(std::shared_ptr<RemoteClient> client) : client_(std::move(client)) {}

  std::string identify_class(const FrameSource& frames, const std::vector<int>& sample,
                             const std::string& oq) override {
    const std::string reply = client_->chat("detector", prompt_identify_class(oq),
                                            refs_for(frames, sample), Stage::TargetDetector);
    // First non-empty line, trimmed.
    std::string cls = reply.substr(0, reply.find('\n'));
    while (!cls.empty() && std::isspace(static_cast<unsigned char>(cls.back()))) cls.pop_back();
    size_t start = 0;
    while (start < cls.size() && std::isspace(static_cast<unsigned char>(cls[start]))) start++;
    cls = cls.substr(start);
    if (cls.empty()) {
      throw StageError(Stage::TargetDetector, "no noun phrase in model reply");
    }
    return cls;
  }

  int select_option(const FrameSource& frames, const std::vector<int>& sample,
                    const std::string& oq, const std::vector<GroundedOption>& options) override {
    const std::string reply = client_->chat("detector", prompt_select_option(oq, options),
                                            refs_for(frames, sample), Stage::TargetDetector);
    auto label = extract_first_integer(reply);
    if (!label) {
      throw StageError(Stage::TargetDetector, "reply names no option label: \"" + reply + "\"");
    }
    return *label;
  }

  std::string describe_target(const FrameSource& frames, const std::string& oq) override {
    const std::string reply = client_->chat("describer", prompt_describe(oq),
                                            refs_for_all(frames), Stage::TargetDescriber);
    if (reply.empty()) throw StageError(Stage::TargetDescriber, "empty description reply");
    return reply;
  }

  std::string refine_description(const FrameSource& frames, const std::string& oq,
                                 const std::string& previous) override {
    const std::string reply = client_->chat("describer", prompt_refine(oq, previous),
                                            refs_for_all(frames), Stage::TargetDescriber);
    if (reply.empty()) throw StageError(Stage::TargetDescriber, "empty refine reply");
    return reply;
  }

 private:
  std::shared_ptr<RemoteClient> client_;
};

class RemoteGrounder : public PhraseGrounder {
 public:
  explicit RemoteGrounder(std::shared_ptr<RemoteClient> client) : client_(std::move(client)) {}
  std::vector<BoundingBox> ground(const FrameSource& frames, int frame,
                                  const std::string& phrase) override {
    const nlohmann::json reply =
        client_->post("/v1/ground", build_ground_request(frames.frame_ref(frame), phrase),
                      Stage::PhraseGrounder);
    if (!reply.contains("boxes") || !reply.at("boxes").is_array()) {
      throw StageError(Stage::PhraseGrounder, "grounder reply lacks a boxes array");
    }
    std::vector<BoundingBox> boxes;
    for (const auto& b : reply.at("boxes")) {
      if (!b.is_array() || b.size() != 4) {
        throw StageError(Stage::PhraseGrounder, "grounder box is not [x_min,y_min,x_max,y_max]");
      }
      boxes.push_back({b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                       b[3].get<double>()});
    }
    return boxes;
  }

 private:
  std::shared_ptr<RemoteClient> client_;
};

class RemoteTracker : public Tracker {
 public:
  explicit RemoteTracker(std::shared_ptr<RemoteClient> client) : client_(std::move(client)) {}
  TrackOutcome track(const FrameSource& frames, FrameRange range, const BoundingBox& init) override {
    std::vector<std::string> refs;
    refs.reserve(static_cast<size_t>(range.length()));
    for (int f = range.start; f < range.end; ++f) refs.push_back(frames.frame_ref(f));
    const nlohmann::json reply =
        client_->post("/v1/track", build_track_request(refs, init), Stage::Tracker);
    TrackOutcome out;
    if (!reply.contains("boxes") || !reply.at("boxes").is_array()) {
      throw StageError(Stage::Tracker, "tracker reply lacks a boxes array");
    }
    for (const auto& b : reply.at("boxes")) {
      out.boxes.push_back({b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                           b[3].get<double>()});
    }
    if (out.boxes.empty()) throw StageError(Stage::Tracker, "tracker returned no boxes");
    out.last_box = out.boxes.back();
    if (reply.contains("lost_at") && !reply.at("lost_at").is_null()) {
      out.completed = false;
      out.lost_at = reply.at("lost_at").get<int>();
      if (out.lost_at <= range.start || out.lost_at >= range.end) {
        throw StageError(Stage::Tracker, "tracker lost_at outside the requested range");
      }
    } else {
      out.completed = true;
    }
    return out;
  }

 private:
  std::shared_ptr<RemoteClient> client_;
};

}  // namespace

BackendSet make_remote_backends(const RemoteConfig& config) {
  auto client = std::make_shared<RemoteClient>(config);
  BackendSet set;
  set.parser = std::make_shared<RemoteParser>(client);
  set.localizer = std::make_shared<RemoteLocalizer>(client);
  set.detector = std::make_shared<RemoteDetector>(client);
  set.grounder = std::make_shared<RemoteGrounder>(client);
  set.tracker = std::make_shared<RemoteTracker>(client);
  return set;
}

}  // namespace tgr
