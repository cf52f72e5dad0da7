#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tgr/world.hpp"

namespace tgr {

/// The triple produced by the temporal parser: a temporal question for the
/// event localizer, an object question for the target detector, and the
/// robot action to perform on the grounded object.
struct ParsedInstruction {
  std::string temporal_question;
  std::string object_question;
  std::string action;
  bool operator==(const ParsedInstruction&) const = default;
};

enum class InstructionSchema {
  PatientRef,    // "... the object that was last poured into"
  InstrumentRef, // "... the cloth used for wiping"
  Chain,         // "... the object that is now where the mug originally was"
  PresentScene,  // "... the green cup" (no past reference)
};

/// Structured form of one instruction. The corpus generator renders these
/// to text; the rule-based parser inverts the same grammar.
struct InstructionSpec {
  InstructionSchema schema = InstructionSchema::PatientRef;
  std::string action;  // as uttered, e.g. "remove", "hand me"
  Verb verb = Verb::Place;
  EventQuery::Qualifier qualifier = EventQuery::Qualifier::None;
  std::string object_class;      // InstrumentRef / PresentScene
  std::vector<std::string> object_attributes;  // PresentScene
  std::string instrument_class;  // PatientRef filter, e.g. "covered by the bowl"
  std::string anchor_class;      // Chain
};

std::string render_instruction(const InstructionSpec& spec);
ParsedInstruction render_parsed(const InstructionSpec& spec);

/// Inverts render_instruction. Throws StageError(TemporalParser) on text
/// outside the grammar (including the empty string).
InstructionSpec parse_instruction(const std::string& instruction);

/// Inverts the temporal-question / object-question templates.
EventQuery parse_temporal_question(const std::string& tq);
EventQuery parse_object_question(const std::string& oq);
EventQuery query_from_spec(const InstructionSpec& spec);

/// Re-prompt issued when the tracker loses the target: asks for the object
/// that now occludes or contains it.
std::string render_occlusion_reprompt(int lost_second, const std::string& original_oq);
std::optional<int> occlusion_reprompt_second(const std::string& oq);

/// Descriptions exchanged with the phrase grounder: the first `keep_attrs`
/// attributes followed by the class name ("green small cloth").
std::string render_description(const std::string& class_name,
                               const std::vector<std::string>& attributes, int keep_attrs);

struct PhraseQuery {
  std::string class_name;
  std::vector<std::string> attributes;
};
/// Last token is the class, preceding tokens are attribute filters.
PhraseQuery parse_phrase(const std::string& phrase);

void to_json(nlohmann::json& j, const ParsedInstruction& p);
void from_json(const nlohmann::json& j, ParsedInstruction& p);

}  // namespace tgr
