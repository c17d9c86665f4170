// Certificate JSON encoding. Every integer that can exceed 64 bits is a
// decimal string; lengths and counts are JSON numbers.

#include <map>

#include "dbns/certify.hpp"
#include "dbns/errors.hpp"

namespace dbns {
namespace {

using nlohmann::json;

json node_to_json(const CertNode& node) {
  json j{{"kind", to_string(node.kind)}, {"n", node.n.get_str()}, {"r", node.r}};
  if (node.kind == CertNode::Kind::NoDp) {
    const DpRefutation& dp = *node.dp;
    if (dp.mode == DpRefutation::Mode::Direct) {
      j["mode"] = "direct";
      j["m"] = dp.m.get_str();
    } else {
      j["mode"] = "lifted";
      j["m0"] = dp.m0.get_str();
      j["m"] = dp.m.get_str();
      j["tuple_count"] = dp.tuples.size();
      json tuples = json::array();
      for (std::size_t i = 0; i < dp.tuples.size(); ++i) {
        json residues = json::array();
        for (auto x : dp.tuples[i]) residues.push_back(std::to_string(x));
        tuples.push_back({{"residues", residues}, {"fibers", dp.fiber_sizes.at(i)}});
      }
      j["tuples"] = tuples;
    }
  }
  if (!node.children.empty()) {
    json children = json::array();
    for (const auto& c : node.children) {
      json cj{{"role", c.role}};
      if (c.role == "divisor") cj["d"] = c.d.get_str();
      cj["node"] = node_to_json(*c.node);
      children.push_back(cj);
    }
    j["children"] = children;
  }
  return j;
}

class Parser {
 public:
  CertPtr node(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "node must be an object");
    auto out = std::make_shared<CertNode>();
    out->kind = kind(str(j, "kind", path), path);
    out->n = big(j, "n", path);
    out->r = integer(j, "r", path);

    if (out->kind == CertNode::Kind::NoDp) {
      DpRefutation dp;
      dp.n = out->n;
      dp.r = out->r;
      const std::string mode = str(j, "mode", path);
      dp.m = big(j, "m", path);
      if (mode == "direct") {
        dp.mode = DpRefutation::Mode::Direct;
      } else if (mode == "lifted") {
        dp.mode = DpRefutation::Mode::Lifted;
        dp.m0 = big(j, "m0", path);
        const json& tuples = field(j, "tuples", path);
        if (!tuples.is_array()) fail(path + "/tuples", "must be an array");
        if (integer(j, "tuple_count", path) != static_cast<long>(tuples.size())) {
          fail(path + "/tuple_count", "does not match the number of tuples");
        }
        for (std::size_t i = 0; i < tuples.size(); ++i) {
          const std::string tp = path + "/tuples/" + std::to_string(i);
          const json& res = field(tuples[i], "residues", tp);
          const json& fib = field(tuples[i], "fibers", tp);
          if (!res.is_array() || !fib.is_array() || res.size() != fib.size()) {
            fail(tp, "residues and fibers must be arrays of equal length");
          }
          DpTuple t;
          std::vector<std::uint32_t> sizes;
          for (std::size_t k = 0; k < res.size(); ++k) {
            if (!res[k].is_string()) fail(tp + "/residues/" + std::to_string(k), "must be a decimal string");
            BigInt x = parse(res[k].get<std::string>(), tp + "/residues/" + std::to_string(k));
            if (x < 0 || !x.fits_ulong_p()) fail(tp + "/residues/" + std::to_string(k), "out of range");
            t.push_back(x.get_ui());
            if (!fib[k].is_number_unsigned()) fail(tp + "/fibers/" + std::to_string(k), "must be a count");
            sizes.push_back(fib[k].get<std::uint32_t>());
          }
          dp.tuples.push_back(std::move(t));
          dp.fiber_sizes.push_back(std::move(sizes));
        }
      } else {
        fail(path + "/mode", "unknown mode '" + mode + "'");
      }
      out->dp = std::move(dp);
    }

    if (j.contains("children")) {
      const json& children = j["children"];
      if (!children.is_array()) fail(path + "/children", "must be an array");
      for (std::size_t i = 0; i < children.size(); ++i) {
        const std::string cp = path + "/children/" + std::to_string(i);
        const json& c = children[i];
        if (!c.is_object()) fail(cp, "child must be an object");
        CertChild child;
        child.role = str(c, "role", cp);
        if (child.role == "divisor") child.d = big(c, "d", cp);
        child.node = node(field(c, "node", cp), cp + "/node");
        out->children.push_back(std::move(child));
      }
    }
    return out;
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw MalformedCertificate(path.empty() ? "/" : path, what);
  }

  static const json& field(const json& j, const char* name, const std::string& path) {
    if (!j.is_object() || !j.contains(name)) fail(path, std::string("missing field '") + name + "'");
    return j[name];
  }
  static std::string str(const json& j, const char* name, const std::string& path) {
    const json& v = field(j, name, path);
    if (!v.is_string()) fail(path + "/" + name, "must be a string");
    return v.get<std::string>();
  }
  static long integer(const json& j, const char* name, const std::string& path) {
    const json& v = field(j, name, path);
    if (!v.is_number_integer()) fail(path + "/" + name, "must be an integer");
    return v.get<long>();
  }
  static BigInt parse(const std::string& s, const std::string& path) {
    BigInt x;
    if (s.empty() || x.set_str(s, 10) != 0) fail(path, "'" + s + "' is not a decimal integer");
    return x;
  }
  static BigInt big(const json& j, const char* name, const std::string& path) {
    const json& v = field(j, name, path);
    if (!v.is_string()) fail(path + "/" + name, "must be a decimal string");
    return parse(v.get<std::string>(), path + "/" + name);
  }
  static CertNode::Kind kind(const std::string& s, const std::string& path) {
    static const std::map<std::string, CertNode::Kind> kinds{
        {"no_length0", CertNode::Kind::NoLength0},   {"no_length1", CertNode::Kind::NoLength1},
        {"no_dp", CertNode::Kind::NoDp},             {"case_split", CertNode::Kind::CaseSplit},
        {"primitive_split", CertNode::Kind::PrimitiveSplit}, {"vacuous", CertNode::Kind::Vacuous},
    };
    auto it = kinds.find(s);
    if (it == kinds.end()) fail(path + "/kind", "unknown node kind '" + s + "'");
    return it->second;
  }
};

}  // namespace

json to_json(const Certificate& cert) {
  json meta{
      {"tool_version", cert.metadata.tool_version},
      {"pool", cert.metadata.pool},
      {"created", cert.metadata.created},
      {"elapsed_seconds", cert.metadata.elapsed_seconds},
  };
  return {
      {"format", kCertificateFormat},
      {"n", cert.n.get_str()},
      {"r", cert.r},
      {"metadata", meta},
      {"root", node_to_json(*cert.root)},
  };
}

Certificate certificate_from_json(const json& j) {
  if (!j.is_object()) Parser::fail("/", "certificate must be a JSON object");
  if (Parser::str(j, "format", "") != kCertificateFormat) {
    Parser::fail("/format", std::string("expected '") + kCertificateFormat + "'");
  }
  Certificate cert;
  cert.n = Parser::big(j, "n", "");
  cert.r = static_cast<int>(Parser::integer(j, "r", ""));
  if (j.contains("metadata") && j["metadata"].is_object()) {
    const json& m = j["metadata"];
    cert.metadata.tool_version = m.value("tool_version", "");
    cert.metadata.pool = m.value("pool", std::vector<std::string>{});
    cert.metadata.created = m.value("created", "");
    cert.metadata.elapsed_seconds = m.value("elapsed_seconds", 0.0);
  }
  Parser parser;
  cert.root = parser.node(Parser::field(j, "root", ""), "/root");
  return cert;
}

}  // namespace dbns
