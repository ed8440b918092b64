#include "treesrl/data.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace treesrl {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void SchemaFail(int line, const std::string& what) {
  throw Error(ErrorCode::kSchemaError, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> StringArray(const Json& value, const char* key, int line) {
  if (!value.is_array()) SchemaFail(line, std::string("'") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) SchemaFail(line, std::string("'") + key + "' must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

int Integer(const Json& object, const char* key, int line) {
  auto it = object.find(key);
  if (it == object.end() || !it->is_number_integer()) {
    SchemaFail(line, std::string("missing integer '") + key + "'");
  }
  return it->get<int>();
}

void RequireKeys(const Json& object, std::initializer_list<const char*> allowed, int line) {
  for (const auto& [key, value] : object.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; })) {
      SchemaFail(line, "unexpected key '" + key + "'");
    }
  }
}

}  // namespace

SrlAnnotation ParseJsonLine(const std::string& line, int line_number) {
  Json record;
  try {
    record = Json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    SchemaFail(line_number, std::string("invalid JSON (") + e.what() + ")");
  }
  if (!record.is_object()) SchemaFail(line_number, "record must be an object");
  RequireKeys(record, {"tokens", "lemmas", "frames"}, line_number);
  if (!record.contains("tokens")) SchemaFail(line_number, "missing 'tokens'");
  if (!record.contains("frames")) SchemaFail(line_number, "missing 'frames'");

  SrlAnnotation annotation;
  annotation.sentence.tokens = StringArray(record["tokens"], "tokens", line_number);
  if (annotation.sentence.tokens.empty()) SchemaFail(line_number, "'tokens' is empty");
  if (record.contains("lemmas")) {
    annotation.sentence.lemmas = StringArray(record["lemmas"], "lemmas", line_number);
  }
  const Json& frames = record["frames"];
  if (!frames.is_array()) SchemaFail(line_number, "'frames' must be an array");
  for (const auto& f : frames) {
    if (!f.is_object()) SchemaFail(line_number, "frame must be an object");
    RequireKeys(f, {"predicate", "args"}, line_number);
    PredicateFrame frame;
    frame.predicate = Integer(f, "predicate", line_number);
    auto args = f.find("args");
    if (args == f.end() || !args->is_array()) SchemaFail(line_number, "'args' must be an array");
    for (const auto& a : *args) {
      if (!a.is_object()) SchemaFail(line_number, "argument must be an object");
      RequireKeys(a, {"start", "end", "role"}, line_number);
      auto role = a.find("role");
      if (role == a.end() || !role->is_string()) SchemaFail(line_number, "missing string 'role'");
      frame.arguments.push_back(
          {{Integer(a, "start", line_number), Integer(a, "end", line_number)},
           role->get<std::string>()});
    }
    annotation.frames.push_back(std::move(frame));
  }
  try {
    ValidateAnnotation(annotation);
  } catch (const Error& e) {
    throw Error(e.code(), "line " + std::to_string(line_number) + ": " + e.what());
  }
  return annotation;
}

std::string ToJsonLine(const SrlAnnotation& annotation) {
  Json record;
  record["tokens"] = annotation.sentence.tokens;
  if (!annotation.sentence.lemmas.empty()) record["lemmas"] = annotation.sentence.lemmas;
  record["frames"] = Json::array();
  for (const auto& frame : annotation.frames) {
    Json f;
    f["predicate"] = frame.predicate;
    f["args"] = Json::array();
    for (const auto& arg : frame.arguments) {
      Json a;
      a["start"] = arg.span.start;
      a["end"] = arg.span.end;
      a["role"] = arg.role;
      f["args"].push_back(std::move(a));
    }
    record["frames"].push_back(std::move(f));
  }
  return record.dump();
}

Corpus ReadJsonl(std::istream& in) {
  Corpus corpus;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    corpus.push_back(ParseJsonLine(line, number));
  }
  return corpus;
}

void WriteJsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& annotation : corpus) out << ToJsonLine(annotation) << '\n';
}

namespace {

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::istringstream stream(line);
  std::vector<std::string> cells;
  for (std::string cell; stream >> cell;) cells.push_back(cell);
  return cells;
}

[[noreturn]] void PropsFail(ErrorCode code, int block, int line, const std::string& what) {
  throw Error(code, "block " + std::to_string(block) + ", line " + std::to_string(line) + ": " +
                        what);
}

// One bracket column -> frame. `first_line` is the file line of row 1.
PredicateFrame ParseBracketColumn(const std::vector<std::vector<std::string>>& rows, size_t column,
                                  int block, int first_line) {
  PredicateFrame frame;
  std::string open_role;
  int open_start = 0;
  for (size_t r = 0; r < rows.size(); ++r) {
    const int position = static_cast<int>(r) + 1;
    const int line = first_line + static_cast<int>(r);
    const std::string& cell = rows[r][column];
    const size_t star = cell.find('*');
    if (star == std::string::npos || cell.find('*', star + 1) != std::string::npos) {
      PropsFail(ErrorCode::kUnbalancedBrackets, block, line, "malformed cell '" + cell + "'");
    }
    const std::string head = cell.substr(0, star);
    const std::string tail = cell.substr(star + 1);
    if (!head.empty()) {
      if (head[0] != '(' || head.size() < 2 || head.find_first_of("()", 1) != std::string::npos) {
        PropsFail(ErrorCode::kUnbalancedBrackets, block, line, "malformed cell '" + cell + "'");
      }
      if (!open_role.empty()) {
        PropsFail(ErrorCode::kUnbalancedBrackets, block, line,
                  "'" + head.substr(1) + "' opens inside open '" + open_role + "'");
      }
      open_role = head.substr(1);
      open_start = position;
    }
    if (tail.find_first_not_of(')') != std::string::npos || tail.size() > 1) {
      PropsFail(ErrorCode::kUnbalancedBrackets, block, line, "malformed cell '" + cell + "'");
    }
    if (tail == ")") {
      if (open_role.empty()) {
        PropsFail(ErrorCode::kUnbalancedBrackets, block, line, "')' closes nothing");
      }
      if (open_role == "V") {
        if (open_start != position) {
          PropsFail(ErrorCode::kSchemaError, block, line, "multi-token predicate");
        }
        if (frame.predicate != 0) PropsFail(ErrorCode::kSchemaError, block, line, "second (V*)");
        frame.predicate = position;
      } else {
        frame.arguments.push_back({{open_start, position}, open_role});
      }
      open_role.clear();
    }
  }
  if (!open_role.empty()) {
    PropsFail(ErrorCode::kUnbalancedBrackets, block, first_line + static_cast<int>(rows.size()) - 1,
              "'" + open_role + "' never closed");
  }
  if (frame.predicate == 0) {
    PropsFail(ErrorCode::kSchemaError, block, first_line, "column without (V*)");
  }
  return frame;
}

SrlAnnotation ParseBlock(const std::vector<std::vector<std::string>>& rows, int block,
                         int first_line) {
  const size_t width = rows[0].size();
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      PropsFail(ErrorCode::kColumnCountMismatch, block, first_line + static_cast<int>(r),
                "expected " + std::to_string(width) + " columns, found " +
                    std::to_string(rows[r].size()));
    }
  }
  if (width < 2) PropsFail(ErrorCode::kColumnCountMismatch, block, first_line, "need >= 2 columns");
  SrlAnnotation annotation;
  for (const auto& row : rows) {
    annotation.sentence.tokens.push_back(row[0]);
    annotation.sentence.lemmas.push_back(row[1]);
  }
  for (size_t c = 2; c < width; ++c) {
    annotation.frames.push_back(ParseBracketColumn(rows, c, block, first_line));
  }
  try {
    ValidateAnnotation(annotation);
  } catch (const Error& e) {
    PropsFail(e.code(), block, first_line, e.what());
  }
  return annotation;
}

}  // namespace

Corpus ReadProps(std::istream& in) {
  Corpus corpus;
  std::vector<std::vector<std::string>> rows;
  int line_number = 0, first_line = 0, block = 0;
  auto flush = [&] {
    if (rows.empty()) return;
    corpus.push_back(ParseBlock(rows, ++block, first_line));
    rows.clear();
  };
  std::string line;
  while (std::getline(in, line)) {
    ++line_number;
    auto cells = SplitWhitespace(line);
    if (cells.empty()) {
      flush();
      continue;
    }
    if (rows.empty()) first_line = line_number;
    rows.push_back(std::move(cells));
  }
  flush();
  return corpus;
}

void WriteProps(std::ostream& out, const Corpus& corpus) {
  for (const auto& annotation : corpus) {
    const Sentence& s = annotation.sentence;
    const int n = s.size();
    std::vector<std::vector<std::string>> columns(2 + annotation.frames.size(),
                                                  std::vector<std::string>(n));
    for (int i = 1; i <= n; ++i) {
      columns[0][i - 1] = s.token(i);
      columns[1][i - 1] = s.lemmas.empty() ? "-" : s.lemmas[i - 1];
    }
    if (s.lemmas.empty()) {
      for (const auto& frame : annotation.frames) columns[1][frame.predicate - 1] = s.token(frame.predicate);
    }
    for (size_t f = 0; f < annotation.frames.size(); ++f) {
      auto& col = columns[2 + f];
      std::fill(col.begin(), col.end(), "*");
      const auto& frame = annotation.frames[f];
      col[frame.predicate - 1] = "(V*)";
      for (const auto& arg : frame.arguments) {
        col[arg.span.start - 1] = "(" + arg.role + "*";
        col[arg.span.end - 1] += ")";
      }
    }
    std::vector<size_t> widths;
    for (const auto& col : columns) {
      size_t w = 0;
      for (const auto& cell : col) w = std::max(w, cell.size());
      widths.push_back(w);
    }
    for (int i = 0; i < n; ++i) {
      std::string row;
      for (size_t c = 0; c < columns.size(); ++c) {
        if (c > 0) row += "  ";
        row += columns[c][i];
        if (c + 1 < columns.size()) row.append(widths[c] - columns[c][i].size(), ' ');
      }
      out << row << '\n';
    }
    out << '\n';
  }
}

Format ParseFormat(const std::string& name) {
  if (name == "jsonl") return Format::kJsonl;
  if (name == "props") return Format::kProps;
  throw Error(ErrorCode::kInvalidConfig, "unknown format '" + name + "'");
}

Corpus ReadCorpus(const std::string& path, Format format) {
  if (path == "-") {
    if (format == Format::kProps) throw Error(ErrorCode::kInvalidConfig, "props needs a file path");
    return ReadJsonl(std::cin);
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  return format == Format::kJsonl ? ReadJsonl(in) : ReadProps(in);
}

void WriteCorpus(const std::string& path, Format format, const Corpus& corpus) {
  if (path == "-") {
    if (format == Format::kProps) throw Error(ErrorCode::kInvalidConfig, "props needs a file path");
    WriteJsonl(std::cout, corpus);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  if (format == Format::kJsonl) WriteJsonl(out, corpus);
  else WriteProps(out, corpus);
}

namespace {

using Tuple = std::tuple<int, int, int, std::string>;  // predicate, start, end, role

std::set<Tuple> Tuples(const PredicateFrame& frame) {
  std::set<Tuple> out;
  for (const auto& arg : frame.arguments) {
    out.insert({frame.predicate, arg.span.start, arg.span.end, arg.role});
  }
  return out;
}

double Percent(long num, long den) { return den == 0 ? 0.0 : 100.0 * num / den; }

}  // namespace

EvalReport Evaluate(const Corpus& gold, const Corpus& predicted) {
  if (gold.size() != predicted.size()) {
    throw Error(ErrorCode::kAlignmentError, "gold has " + std::to_string(gold.size()) +
                                                " sentences, prediction has " +
                                                std::to_string(predicted.size()));
  }
  EvalReport report;
  for (size_t k = 0; k < gold.size(); ++k) {
    if (gold[k].sentence.size() != predicted[k].sentence.size()) {
      throw Error(ErrorCode::kAlignmentError,
                  "sentence " + std::to_string(k + 1) + " differs in length");
    }
    std::map<int, std::set<Tuple>> pred_frames;
    for (const auto& frame : predicted[k].frames) {
      auto tuples = Tuples(frame);
      report.predicted += static_cast<long>(tuples.size());
      pred_frames[frame.predicate] = std::move(tuples);
    }
    for (const auto& frame : gold[k].frames) {
      const auto gold_tuples = Tuples(frame);
      report.gold += static_cast<long>(gold_tuples.size());
      ++report.gold_predicates;
      auto it = pred_frames.find(frame.predicate);
      const std::set<Tuple> empty;
      const std::set<Tuple>& pred_tuples = it == pred_frames.end() ? empty : it->second;
      for (const auto& t : gold_tuples) report.matched += static_cast<long>(pred_tuples.count(t));
      if (pred_tuples == gold_tuples) ++report.complete_predicates;
    }
  }
  report.precision = Percent(report.matched, report.predicted);
  report.recall = Percent(report.matched, report.gold);
  const double pr = report.precision + report.recall;
  report.f1 = pr == 0.0 ? 0.0 : 2 * report.precision * report.recall / pr;
  report.cm = Percent(report.complete_predicates, report.gold_predicates);
  return report;
}

std::string FormatReport(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "precision " << report.precision << '\n'
      << "recall " << report.recall << '\n'
      << "f1 " << report.f1 << '\n'
      << "cm " << report.cm << '\n'
      << "matched " << report.matched << '\n'
      << "predicted " << report.predicted << '\n'
      << "gold " << report.gold << '\n'
      << "gold_predicates " << report.gold_predicates << '\n'
      << "complete_predicates " << report.complete_predicates << '\n';
  return out.str();
}

}  // namespace treesrl
