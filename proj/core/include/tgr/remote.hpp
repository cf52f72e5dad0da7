#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "tgr/backends.hpp"

namespace tgr {

/// Remote serving configuration. The endpoint may come from a config file or
/// the TGR_ENDPOINT environment variable (env wins); the credential comes
/// only from TGR_API_KEY, never from files or flags.
struct RemoteConfig {
  std::string endpoint;  // e.g. "http://127.0.0.1:8089"
  std::map<std::string, std::string> models = {
      {"parser", "stub-parser"},       {"localizer", "stub-localizer"},
      {"detector", "stub-detector"},   {"describer", "stub-describer"},
  };
  int timeout_ms = 10000;
  int max_retries = 2;
  int backoff_ms = 50;

  static RemoteConfig from_file(const std::filesystem::path& path);
  static RemoteConfig from_environment();  // endpoint from TGR_ENDPOINT
  void apply_environment();                // overlay env on a file config
};

// Request builders. These fix the wire shapes; golden tests freeze them.
nlohmann::json build_chat_request(const std::string& model, const std::string& prompt,
                                  const std::vector<std::string>& image_refs);
nlohmann::json build_ground_request(const std::string& image_ref, const std::string& phrase);
nlohmann::json build_track_request(const std::vector<std::string>& frame_refs,
                                   const BoundingBox& init_box);

// Prompt templates sent to chat-style roles. The first line names the task.
std::string prompt_parse(const std::string& instruction);
std::string prompt_localize(const std::string& temporal_question);
std::string prompt_identify_class(const std::string& object_question);
std::string prompt_select_option(const std::string& object_question,
                                 const std::vector<GroundedOption>& options);
std::string prompt_describe(const std::string& object_question);
std::string prompt_refine(const std::string& object_question, const std::string& previous);

// Tolerant reply extractors. Extraction failure is a typed stage error at
// the call site, never a silent default.
std::optional<int> extract_first_integer(const std::string& text);
/// Accepts "second 12", "12s", and "12th second" forms; falls back to the
/// first integer in the reply.
std::optional<int> extract_timestamp_seconds(const std::string& text);
std::optional<ParsedInstruction> extract_parsed(const std::string& text);

/// HTTP clients speaking the wire protocol: chat completions for the text
/// roles, /v1/ground for the grounder, /v1/track for the tracker.
BackendSet make_remote_backends(const RemoteConfig& config);

}  // namespace tgr
