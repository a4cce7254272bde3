#include "pitransfer/context_io.hpp"

#include <fstream>

namespace pitransfer {

using nlohmann::ordered_json;

ordered_json context_to_json(const Context& ctx) {
  ordered_json doc;
  doc["schema"] = kContextSchemaVersion;
  doc["name"] = ctx.name();
  doc["basis"] = ctx.basis_names();
  ordered_json quantities = ordered_json::object();
  for (const Quantity& q : ctx.entries()) {
    quantities[q.name] = {
        {"value", q.value},
        {"dim", {q.dim.mass_exp, q.dim.length_exp, q.dim.time_exp}},
    };
  }
  doc["quantities"] = std::move(quantities);
  return doc;
}

Context context_from_json(const ordered_json& doc) {
  try {
    if (!doc.is_object()) throw InvalidConfig("context document is not an object");
    const int schema = doc.at("schema").get<int>();
    if (schema != kContextSchemaVersion) {
      throw FormatVersionMismatch("unsupported context schema version " +
                                  std::to_string(schema));
    }
    const std::string name = doc.at("name").get<std::string>();
    const auto& basis = doc.at("basis");
    if (!basis.is_array() || basis.size() != 3) {
      throw InvalidConfig("context 'basis' must list exactly 3 quantity names");
    }
    std::array<std::string, 3> basis_names{basis[0].get<std::string>(),
                                           basis[1].get<std::string>(),
                                           basis[2].get<std::string>()};
    const auto& quantities = doc.at("quantities");
    if (!quantities.is_object() || quantities.empty()) {
      throw InvalidConfig("context 'quantities' must be a non-empty object");
    }
    std::vector<Quantity> entries;
    entries.reserve(quantities.size());
    for (const auto& [qname, body] : quantities.items()) {
      const auto& dim = body.at("dim");
      if (!dim.is_array() || dim.size() != 3) {
        throw InvalidConfig("quantity '" + qname + "' needs dim = [a, b, c]");
      }
      entries.emplace_back(qname, body.at("value").get<double>(),
                           Dimension{dim[0].get<double>(), dim[1].get<double>(),
                                     dim[2].get<double>()});
    }
    return Context(name, std::move(entries), std::move(basis_names));
  } catch (const ordered_json::exception& e) {
    throw InvalidConfig(std::string("malformed context document: ") + e.what());
  }
}

Context load_context(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open context file: " + path.string());
  ordered_json doc;
  try {
    in >> doc;
  } catch (const ordered_json::exception& e) {
    throw InvalidConfig("cannot parse context file " + path.string() + ": " + e.what());
  }
  return context_from_json(doc);
}

void save_context(const Context& ctx, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open context file for writing: " + path.string());
  out << context_to_json(ctx).dump(2) << '\n';
  if (!out) throw IoError("failed writing context file: " + path.string());
}

}  // namespace pitransfer
