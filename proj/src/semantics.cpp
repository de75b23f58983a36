#include "infoscribe/semantics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "canon.hpp"
#include "infoscribe/errors.hpp"

namespace infoscribe {

namespace {

using json = nlohmann::json;

const json& need(const json& obj, const char* key, const char* where) {
  if (!obj.is_object()) throw SchemaError(std::string(where) + " is not an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(std::string(where) + " is missing '" + key + "'");
  return *it;
}

std::string need_string(const json& obj, const char* key, const char* where) {
  const json& v = need(obj, key, where);
  if (!v.is_string()) throw SchemaError(std::string(where) + "." + key + " must be a string");
  return v.get<std::string>();
}

std::pair<double, double> parse_range(const json& v, const char* what, double lo_bound,
                                      double hi_bound) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw SchemaError(std::string(what) + " must be a [lo, hi] number pair");
  const double lo = v[0].get<double>();
  const double hi = v[1].get<double>();
  if (lo > hi) throw EmptyRange(std::string(what) + " is empty: lo > hi");
  if (lo < lo_bound || hi > hi_bound)
    throw SchemaError(std::string(what) + " out of bounds");
  return {lo, hi};
}

bool attributes_match(const RegionDescriptor& r, const WordEntry& w) {
  if (w.has_intensity &&
      (r.mean_intensity < w.intensity_lo || r.mean_intensity > w.intensity_hi))
    return false;
  if (w.has_area_fraction &&
      (r.area_fraction < w.area_fraction_lo || r.area_fraction > w.area_fraction_hi))
    return false;
  return true;
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

Lexicon load_lexicon(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("lexicon must be an object");

  const std::string version = need_string(doc, "version", "lexicon");
  if (version != kLexiconFormatVersion)
    throw VersionError("unsupported lexicon version '" + version + "'");

  Lexicon lex;
  lex.title_pattern = need_string(doc, "title_pattern", "lexicon");

  const json& words = need(doc, "words", "lexicon");
  if (!words.is_array()) throw SchemaError("words must be an array");
  std::set<std::string> names;
  for (const json& jw : words) {
    WordEntry w;
    w.name = need_string(jw, "name", "word");
    if (w.name.empty()) throw SchemaError("word name cannot be empty");
    if (!names.insert(w.name).second)
      throw SchemaError("duplicate word name '" + w.name + "'");
    if (jw.contains("intensity")) {
      auto [lo, hi] = parse_range(jw["intensity"], "intensity", 0.0, 255.0);
      w.has_intensity = true;
      w.intensity_lo = lo;
      w.intensity_hi = hi;
    }
    if (jw.contains("area_fraction")) {
      auto [lo, hi] = parse_range(jw["area_fraction"], "area_fraction", 0.0, 1.0);
      if (hi <= 0) throw EmptyRange("area_fraction range is empty");
      w.has_area_fraction = true;
      w.area_fraction_lo = lo;
      w.area_fraction_hi = hi;
    }
    if (jw.contains("relations")) {
      const json& rels = jw["relations"];
      if (!rels.is_array()) throw SchemaError("word relations must be an array");
      for (const json& jr : rels) {
        auto kind = relation_kind_from_name(need_string(jr, "kind", "word relation"));
        if (!kind) throw SchemaError("unknown relation kind in word");
        w.relations.push_back({*kind, need_string(jr, "target", "word relation")});
      }
    }
    lex.words.push_back(std::move(w));
  }

  // Word relation targets must name declared words.
  for (const WordEntry& w : lex.words)
    for (const auto& req : w.relations)
      if (!names.count(req.target))
        throw DanglingReference("word '" + w.name + "' requires undeclared word '" +
                                req.target + "'");

  const json& phrases = need(doc, "phrases", "lexicon");
  if (!phrases.is_array()) throw SchemaError("phrases must be an array");
  std::set<std::string> phrase_names;
  for (const json& jp : phrases) {
    PhraseEntry p;
    p.name = need_string(jp, "name", "phrase");
    if (!phrase_names.insert(p.name).second)
      throw SchemaError("duplicate phrase name '" + p.name + "'");
    const json& members = need(jp, "members", "phrase");
    if (!members.is_array() || members.empty())
      throw SchemaError("phrase members must be a non-empty array");
    std::set<std::string> member_set;
    for (const json& jm : members) {
      if (!jm.is_string()) throw SchemaError("phrase member must be a string");
      const std::string m = jm.get<std::string>();
      if (!names.count(m))
        throw DanglingReference("phrase '" + p.name + "' names undeclared word '" + m + "'");
      if (!member_set.insert(m).second)
        throw SchemaError("phrase '" + p.name + "' repeats member '" + m + "'");
      p.members.push_back(m);
    }
    if (jp.contains("requirements")) {
      const json& reqs = jp["requirements"];
      if (!reqs.is_array()) throw SchemaError("phrase requirements must be an array");
      for (const json& jr : reqs) {
        auto kind = relation_kind_from_name(need_string(jr, "kind", "phrase requirement"));
        if (!kind) throw SchemaError("unknown relation kind in phrase");
        if (*kind == RelationKind::sub_part_of)
          throw SchemaError("sub_part_of cannot relate two same-level phrase members");
        PhraseEntry::Requirement req;
        req.kind = *kind;
        req.subject = need_string(jr, "subject", "phrase requirement");
        req.object = need_string(jr, "object", "phrase requirement");
        if (!member_set.count(req.subject) || !member_set.count(req.object))
          throw DanglingReference("phrase '" + p.name +
                                  "' requirement references a non-member word");
        p.requirements.push_back(std::move(req));
      }
    }
    p.sentence = need_string(jp, "sentence", "phrase");
    lex.phrases.push_back(std::move(p));
  }

  return lex;
}

std::string serialize_lexicon(const Lexicon& lex) {
  std::string out;
  out += "{\"version\":\"";
  out += kLexiconFormatVersion;
  out += "\",\"title_pattern\":";
  canon::append_json_string(out, lex.title_pattern);
  out += ",\"words\":[";
  for (std::size_t i = 0; i < lex.words.size(); ++i) {
    if (i) out += ',';
    const WordEntry& w = lex.words[i];
    out += "{\"name\":";
    canon::append_json_string(out, w.name);
    if (w.has_intensity) {
      out += ",\"intensity\":[";
      out += canon::real6(w.intensity_lo);
      out += ',';
      out += canon::real6(w.intensity_hi);
      out += ']';
    }
    if (w.has_area_fraction) {
      out += ",\"area_fraction\":[";
      out += canon::real6(w.area_fraction_lo);
      out += ',';
      out += canon::real6(w.area_fraction_hi);
      out += ']';
    }
    if (!w.relations.empty()) {
      out += ",\"relations\":[";
      for (std::size_t j = 0; j < w.relations.size(); ++j) {
        if (j) out += ',';
        out += "{\"kind\":\"";
        out += relation_kind_name(w.relations[j].kind);
        out += "\",\"target\":";
        canon::append_json_string(out, w.relations[j].target);
        out += '}';
      }
      out += ']';
    }
    out += '}';
  }
  out += "],\"phrases\":[";
  for (std::size_t i = 0; i < lex.phrases.size(); ++i) {
    if (i) out += ',';
    const PhraseEntry& p = lex.phrases[i];
    out += "{\"name\":";
    canon::append_json_string(out, p.name);
    out += ",\"members\":[";
    for (std::size_t j = 0; j < p.members.size(); ++j) {
      if (j) out += ',';
      canon::append_json_string(out, p.members[j]);
    }
    out += ']';
    if (!p.requirements.empty()) {
      out += ",\"requirements\":[";
      for (std::size_t j = 0; j < p.requirements.size(); ++j) {
        if (j) out += ',';
        const auto& r = p.requirements[j];
        out += "{\"kind\":\"";
        out += relation_kind_name(r.kind);
        out += "\",\"subject\":";
        canon::append_json_string(out, r.subject);
        out += ",\"object\":";
        canon::append_json_string(out, r.object);
        out += '}';
      }
      out += ']';
    }
    out += ",\"sentence\":";
    canon::append_json_string(out, p.sentence);
    out += '}';
  }
  out += "]}";
  return out;
}

Assignments fire_labels(const ImageDescription& d, const Lexicon& lex) {
  if (d.levels.empty()) return {};
  const LevelDescription& base = d.levels.back();
  const LevelDescription* up = d.levels.size() > 1 ? &d.levels[d.levels.size() - 2] : nullptr;

  std::map<std::uint32_t, const RegionDescriptor*> here;
  for (const RegionDescriptor& r : base.regions) here[r.label] = &r;
  std::map<std::uint32_t, const RegionDescriptor*> above;
  if (up)
    for (const RegionDescriptor& r : up->regions) above[r.label] = &r;

  auto find_target = [&](const Relation& rel) -> const RegionDescriptor* {
    if (rel.kind == RelationKind::sub_part_of) {
      auto it = above.find(rel.target);
      return it == above.end() ? nullptr : it->second;
    }
    auto it = here.find(rel.target);
    return it == here.end() ? nullptr : it->second;
  };

  auto word_matches = [&](const RegionDescriptor& r, const WordEntry& w) {
    if (!attributes_match(r, w)) return false;
    for (const WordEntry::Requirement& req : w.relations) {
      const WordEntry* tw = nullptr;
      for (const WordEntry& cand : lex.words)
        if (cand.name == req.target) {
          tw = &cand;
          break;
        }
      bool found = false;
      for (const Relation& rel : r.relations) {
        if (rel.kind != req.kind) continue;
        const RegionDescriptor* t = find_target(rel);
        if (t && tw && attributes_match(*t, *tw)) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    return true;
  };

  Assignments out;
  for (const RegionDescriptor& r : base.regions) {
    const WordEntry* best = nullptr;
    for (const WordEntry& w : lex.words) {
      if (!word_matches(r, w)) continue;
      if (!best || w.constraint_count() > best->constraint_count()) best = &w;
    }
    if (best) out.emplace_back(r.label, best->name);
  }
  return out;
}

std::vector<PhraseInstance> affirm_context(const Assignments& assignments,
                                           const ImageDescription& d, const Lexicon& lex) {
  std::vector<PhraseInstance> out;
  if (d.levels.empty()) return out;
  const LevelDescription& base = d.levels.back();
  std::map<std::uint32_t, const RegionDescriptor*> here;
  for (const RegionDescriptor& r : base.regions) here[r.label] = &r;

  // Regions per word, ascending label (assignments are already ascending).
  std::map<std::string, std::vector<std::uint32_t>> by_word;
  for (const auto& [label, word] : assignments) by_word[word].push_back(label);

  auto relation_holds = [&](std::uint32_t subject, RelationKind kind, std::uint32_t object) {
    auto it = here.find(subject);
    if (it == here.end()) return false;
    for (const Relation& rel : it->second->relations)
      if (rel.kind == kind && rel.target == object) return true;
    return false;
  };

  for (const PhraseEntry& phrase : lex.phrases) {
    const std::size_t k = phrase.members.size();
    std::vector<const std::vector<std::uint32_t>*> candidates(k);
    bool possible = true;
    for (std::size_t i = 0; i < k; ++i) {
      auto it = by_word.find(phrase.members[i]);
      if (it == by_word.end() || it->second.empty()) {
        possible = false;
        break;
      }
      candidates[i] = &it->second;
    }
    if (!possible) continue;

    std::vector<std::uint32_t> bound(k, 0);
    // Lexicographic enumeration; requirements checked as soon as both of
    // their endpoints are bound.
    auto requirements_ok_upto = [&](std::size_t depth) {
      for (const PhraseEntry::Requirement& req : phrase.requirements) {
        std::size_t si = k, oi = k;
        for (std::size_t i = 0; i < k; ++i) {
          if (phrase.members[i] == req.subject) si = i;
          if (phrase.members[i] == req.object) oi = i;
        }
        if (si > depth || oi > depth) continue;
        if (!relation_holds(bound[si], req.kind, bound[oi])) return false;
      }
      return true;
    };
    auto enumerate = [&](auto&& self, std::size_t depth) -> void {
      if (depth == k) {
        PhraseInstance inst;
        inst.phrase = phrase.name;
        for (std::size_t i = 0; i < k; ++i) inst.bindings.emplace_back(phrase.members[i], bound[i]);
        out.push_back(std::move(inst));
        return;
      }
      for (std::uint32_t label : *candidates[depth]) {
        bool dup = false;
        for (std::size_t i = 0; i < depth; ++i)
          if (bound[i] == label) dup = true;
        if (dup) continue;
        bound[depth] = label;
        if (requirements_ok_upto(depth)) self(self, depth + 1);
      }
    };
    enumerate(enumerate, 0);
  }
  return out;
}

std::string compose_narrative(const std::vector<PhraseInstance>& affirmed,
                              const Lexicon& lex) {
  // Distinct affirmed phrase names in declaration order.
  std::set<std::string> affirmed_names;
  for (const PhraseInstance& inst : affirmed) affirmed_names.insert(inst.phrase);
  std::string joined;
  for (const PhraseEntry& p : lex.phrases) {
    if (!affirmed_names.count(p.name)) continue;
    if (!joined.empty()) joined += ", ";
    joined += p.name;
  }

  std::string title = lex.title_pattern;
  replace_all(title, "{phrases}", joined);
  std::string out = title + "\n";

  if (affirmed.empty()) {
    out += "No phrases affirmed.\n";
    return out;
  }
  for (const PhraseInstance& inst : affirmed) {
    const PhraseEntry* phrase = nullptr;
    for (const PhraseEntry& p : lex.phrases)
      if (p.name == inst.phrase) phrase = &p;
    std::string sentence = phrase ? phrase->sentence : "";
    for (const auto& [word, label] : inst.bindings)
      replace_all(sentence, "{" + word + "}", word);
    out += sentence + "\n";
  }
  return out;
}

Annotation annotate(const ImageDescription& d, const Lexicon& lex) {
  Annotation a;
  a.assignments = fire_labels(d, lex);
  std::set<std::uint32_t> assigned;
  for (const auto& [label, word] : a.assignments) assigned.insert(label);
  if (!d.levels.empty())
    for (const RegionDescriptor& r : d.levels.back().regions)
      if (!assigned.count(r.label)) a.unmatched.push_back(r.label);
  a.phrases = affirm_context(a.assignments, d, lex);
  a.narrative = compose_narrative(a.phrases, lex);
  return a;
}

std::string serialize_annotation(const Annotation& a) {
  std::string out;
  out += "{\"version\":\"";
  out += kAnnotationFormatVersion;
  out += "\",\"assignments\":[";
  for (std::size_t i = 0; i < a.assignments.size(); ++i) {
    if (i) out += ',';
    out += "{\"label\":";
    out += std::to_string(a.assignments[i].first);
    out += ",\"word\":";
    canon::append_json_string(out, a.assignments[i].second);
    out += '}';
  }
  out += "],\"unmatched\":[";
  for (std::size_t i = 0; i < a.unmatched.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(a.unmatched[i]);
  }
  out += "],\"phrases\":[";
  for (std::size_t i = 0; i < a.phrases.size(); ++i) {
    if (i) out += ',';
    const PhraseInstance& inst = a.phrases[i];
    out += "{\"name\":";
    canon::append_json_string(out, inst.phrase);
    out += ",\"bindings\":[";
    for (std::size_t j = 0; j < inst.bindings.size(); ++j) {
      if (j) out += ',';
      out += "{\"word\":";
      canon::append_json_string(out, inst.bindings[j].first);
      out += ",\"label\":";
      out += std::to_string(inst.bindings[j].second);
      out += '}';
    }
    out += "]}";
  }
  out += "],\"narrative\":";
  canon::append_json_string(out, a.narrative);
  out += '}';
  return out;
}

}  // namespace infoscribe
