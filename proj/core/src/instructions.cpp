#include "tgr/instructions.hpp"

#include <algorithm>
#include <array>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tgr/errors.hpp"

namespace tgr {
namespace {

struct VerbForms {
  Verb verb;
  const char* past_participle;  // patient reference: "the object that was <pp>"
  const char* gerund;           // instrument reference: "used for <gerund>" (nullptr = none)
};

constexpr std::array<VerbForms, 10> kVerbForms{{
    {Verb::Pick, "picked up", nullptr},
    {Verb::Place, "placed", nullptr},
    {Verb::Pour, "poured into", "pouring"},
    {Verb::Wipe, "wiped", "wiping"},
    {Verb::Stack, "stacked", "stacking"},
    {Verb::Swap, "swapped", nullptr},
    {Verb::Reposition, "repositioned", nullptr},
    {Verb::Drop, "dropped", nullptr},
    {Verb::Cover, "covered", "covering"},
    {Verb::Remove, "removed", nullptr},
}};

const VerbForms& forms(Verb v) {
  for (const auto& f : kVerbForms) {
    if (f.verb == v) return f;
  }
  throw ValidationError("no verb forms");
}

std::string qualifier_prefix(EventQuery::Qualifier q) {
  switch (q) {
    case EventQuery::Qualifier::None: return "";
    case EventQuery::Qualifier::First: return "first ";
    case EventQuery::Qualifier::Second: return "second ";
    case EventQuery::Qualifier::Last: return "last ";
  }
  return "";
}

// Filter clause naming the instrument: cover reads better with "by".
std::string filter_clause(Verb v, const std::string& instrument_class) {
  if (instrument_class.empty()) return "";
  return (v == Verb::Cover ? " by the " : " with the ") + instrument_class;
}

std::string patient_phrase(const InstructionSpec& s) {
  return qualifier_prefix(s.qualifier) + forms(s.verb).past_participle +
         filter_clause(s.verb, s.instrument_class);
}

std::string joined_ref(const std::string& cls, const std::vector<std::string>& attrs) {
  std::string out;
  for (const auto& a : attrs) out += a + " ";
  return out + cls;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

bool consume_prefix(std::string& s, const std::string& prefix) {
  if (s.rfind(prefix, 0) != 0) return false;
  s.erase(0, prefix.size());
  return true;
}

bool consume_suffix(std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size() || s.compare(s.size() - suffix.size(), suffix.size(), suffix) != 0) {
    return false;
  }
  s.erase(s.size() - suffix.size());
  return true;
}

[[noreturn]] void parse_fail(const std::string& what, const std::string& text) {
  throw StageError(Stage::TemporalParser, what + ": \"" + text + "\"");
}

EventQuery::Qualifier take_qualifier(std::string& s) {
  if (consume_prefix(s, "first ")) return EventQuery::Qualifier::First;
  if (consume_prefix(s, "second ")) return EventQuery::Qualifier::Second;
  if (consume_prefix(s, "last ")) return EventQuery::Qualifier::Last;
  return EventQuery::Qualifier::None;
}

// Parses "<qual> <pp> [by|with the <class>]" into spec fields.
void parse_patient_tail(std::string tail, InstructionSpec& out, const std::string& original) {
  out.schema = InstructionSchema::PatientRef;
  out.qualifier = take_qualifier(tail);
  for (const char* sep : {" by the ", " with the "}) {
    auto pos = tail.find(sep);
    if (pos != std::string::npos) {
      out.instrument_class = tail.substr(pos + std::string(sep).size());
      tail = tail.substr(0, pos);
      break;
    }
  }
  for (const auto& f : kVerbForms) {
    if (tail == f.past_participle) {
      out.verb = f.verb;
      return;
    }
  }
  parse_fail("unknown interaction reference", original);
}

// Parses "<class> [that was] used for <gerund>".
bool try_parse_used_for(std::string body, InstructionSpec& out) {
  const std::string that_was = " that was used for ";
  const std::string plain = " used for ";
  std::string cls, ger;
  auto pos = body.find(that_was);
  if (pos != std::string::npos) {
    cls = body.substr(0, pos);
    ger = body.substr(pos + that_was.size());
  } else {
    pos = body.find(plain);
    if (pos == std::string::npos) return false;
    cls = body.substr(0, pos);
    ger = body.substr(pos + plain.size());
  }
  for (const auto& f : kVerbForms) {
    if (f.gerund && ger == f.gerund) {
      out.schema = InstructionSchema::InstrumentRef;
      out.verb = f.verb;
      out.object_class = cls;
      return true;
    }
  }
  return false;
}

const std::string kChainInfix = "object that is now where the ";
const std::string kChainSuffix = " originally was";

// Parses the reference body of an instruction (text after "<action> the ").
InstructionSpec parse_reference(std::string body, const std::string& original) {
  InstructionSpec out;
  if (consume_prefix(body, kChainInfix)) {
    if (!consume_suffix(body, kChainSuffix)) parse_fail("malformed chain reference", original);
    out.schema = InstructionSchema::Chain;
    out.anchor_class = body;
    return out;
  }
  if (consume_prefix(body, "object that was ")) {
    parse_patient_tail(body, out, original);
    return out;
  }
  if (try_parse_used_for(body, out)) return out;

  // Present-scene reference: "<attr> <attr> <class>".
  out.schema = InstructionSchema::PresentScene;
  std::istringstream in(body);
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  if (tokens.empty()) parse_fail("empty object reference", original);
  out.object_class = tokens.back();
  tokens.pop_back();
  out.object_attributes = tokens;
  return out;
}

}  // namespace

std::string render_instruction(const InstructionSpec& s) {
  switch (s.schema) {
    case InstructionSchema::PatientRef:
      return "Robot, " + s.action + " the object that was " + patient_phrase(s) + ".";
    case InstructionSchema::InstrumentRef:
      return "Robot, " + s.action + " the " + s.object_class + " used for " +
             forms(s.verb).gerund + ".";
    case InstructionSchema::Chain:
      return "Robot, " + s.action + " the " + kChainInfix + s.anchor_class + kChainSuffix + ".";
    case InstructionSchema::PresentScene:
      return "Robot, " + s.action + " the " + joined_ref(s.object_class, s.object_attributes) + ".";
  }
  throw ValidationError("unreachable schema");
}

ParsedInstruction render_parsed(const InstructionSpec& s) {
  ParsedInstruction p;
  p.action = capitalize(s.action);
  switch (s.schema) {
    case InstructionSchema::PatientRef:
      p.temporal_question = "When was the object " + patient_phrase(s);
      p.object_question = "Identify the object that was " + patient_phrase(s);
      break;
    case InstructionSchema::InstrumentRef:
      p.temporal_question = "When was the " + s.object_class + " being used for " + forms(s.verb).gerund;
      p.object_question =
          "Identify the " + s.object_class + " that was used for " + forms(s.verb).gerund;
      break;
    case InstructionSchema::Chain:
      p.temporal_question = "When was an object moved to where the " + s.anchor_class + kChainSuffix;
      p.object_question = "Identify the " + kChainInfix + s.anchor_class + kChainSuffix;
      break;
    case InstructionSchema::PresentScene:
      p.temporal_question = "Where is the " + joined_ref(s.object_class, s.object_attributes) + " now";
      p.object_question = "Identify the " + joined_ref(s.object_class, s.object_attributes);
      break;
  }
  return p;
}

InstructionSpec parse_instruction(const std::string& instruction) {
  if (instruction.empty()) throw StageError(Stage::TemporalParser, "empty instruction");
  std::string s = instruction;
  if (!consume_prefix(s, "Robot, ")) parse_fail("instruction must address the robot", instruction);
  const std::string marker = " the ";
  auto pos = s.find(marker);
  if (pos == std::string::npos || pos == 0) parse_fail("no action/object split", instruction);
  InstructionSpec out;
  std::string action = s.substr(0, pos);
  std::string body = s.substr(pos + marker.size());
  consume_suffix(body, ".");
  out = parse_reference(body, instruction);
  out.action = action;
  return out;
}

EventQuery query_from_spec(const InstructionSpec& s) {
  EventQuery q;
  switch (s.schema) {
    case InstructionSchema::PatientRef:
      q.kind = EventQuery::Kind::ByVerb;
      q.verb = s.verb;
      q.role = EventQuery::Role::Patient;
      q.qualifier = s.qualifier;
      q.instrument_class = s.instrument_class;
      break;
    case InstructionSchema::InstrumentRef:
      q.kind = EventQuery::Kind::ByVerb;
      q.verb = s.verb;
      q.role = EventQuery::Role::Instrument;
      q.qualifier = s.qualifier;
      q.instrument_class = s.object_class;
      break;
    case InstructionSchema::Chain:
      q.kind = EventQuery::Kind::ChainToAnchor;
      q.qualifier = s.qualifier;
      q.anchor_class = s.anchor_class;
      break;
    case InstructionSchema::PresentScene:
      q.kind = EventQuery::Kind::PresentScene;
      q.object_class = s.object_class;
      q.object_attributes = s.object_attributes;
      break;
  }
  return q;
}

EventQuery parse_temporal_question(const std::string& tq) {
  std::string s = tq;
  InstructionSpec spec;
  if (consume_prefix(s, "When was the object ")) {
    parse_patient_tail(s, spec, tq);
    return query_from_spec(spec);
  }
  if (consume_prefix(s, "When was an object moved to where the ")) {
    if (!consume_suffix(s, kChainSuffix)) parse_fail("malformed chain question", tq);
    spec.schema = InstructionSchema::Chain;
    spec.anchor_class = s;
    return query_from_spec(spec);
  }
  if (consume_prefix(s, "When was the ")) {
    const std::string sep = " being used for ";
    auto pos = s.find(sep);
    if (pos == std::string::npos) parse_fail("malformed temporal question", tq);
    if (!try_parse_used_for(s.substr(0, pos) + " used for " + s.substr(pos + sep.size()), spec)) {
      parse_fail("unknown gerund in temporal question", tq);
    }
    return query_from_spec(spec);
  }
  if (consume_prefix(s, "Where is the ") && consume_suffix(s, " now")) {
    spec = parse_reference(s, tq);
    if (spec.schema != InstructionSchema::PresentScene) parse_fail("malformed scene question", tq);
    return query_from_spec(spec);
  }
  parse_fail("unrecognized temporal question", tq);
}

EventQuery parse_object_question(const std::string& oq) {
  std::string s = oq;
  if (!consume_prefix(s, "Identify the ")) parse_fail("unrecognized object question", oq);
  return query_from_spec(parse_reference(s, oq));
}

std::string render_occlusion_reprompt(int lost_second, const std::string& original_oq) {
  return "The tracked object went out of view at second " + std::to_string(lost_second) +
         ". Identify the object that now occludes or contains it. Original question: " + original_oq;
}

std::optional<int> occlusion_reprompt_second(const std::string& oq) {
  static const std::regex re("went out of view at second (\\d+)\\.");
  std::smatch m;
  if (std::regex_search(oq, m, re)) return std::stoi(m[1].str());
  return std::nullopt;
}

std::string render_description(const std::string& class_name,
                               const std::vector<std::string>& attributes, int keep_attrs) {
  const int n = std::clamp<int>(keep_attrs, 0, static_cast<int>(attributes.size()));
  std::string out;
  for (int i = 0; i < n; ++i) out += attributes[static_cast<size_t>(i)] + " ";
  return out + class_name;
}

PhraseQuery parse_phrase(const std::string& phrase) {
  std::istringstream in(phrase);
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  if (tokens.empty()) return {};
  PhraseQuery q;
  q.class_name = tokens.back();
  tokens.pop_back();
  q.attributes = tokens;
  return q;
}

void to_json(nlohmann::json& j, const ParsedInstruction& p) {
  j = nlohmann::json{{"temporal_question", p.temporal_question},
                     {"object_question", p.object_question},
                     {"action", p.action}};
}
void from_json(const nlohmann::json& j, ParsedInstruction& p) {
  j.at("temporal_question").get_to(p.temporal_question);
  j.at("object_question").get_to(p.object_question);
  j.at("action").get_to(p.action);
}

}  // namespace tgr
