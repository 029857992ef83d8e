#include "divsamp/schema.hpp"

#include <fstream>
#include <sstream>

#include "divsamp/errors.hpp"
#include "json.hpp"

namespace divsamp {

namespace {

// The hole marker is reserved for compound serialization and must never
// collide with schema vocabulary.
constexpr const char* kHole = "▢";

void check_symbol(const std::string& text, const char* field) {
    if (text.empty()) throw ConfigError(std::string(field) + ": empty value");
    if (text == kHole) throw ConfigError(std::string(field) + ": hole marker is reserved");
}

}  // namespace

Schema Schema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("schema: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

Schema Schema::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("schema: invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("domains") || !doc.contains("tables"))
        throw ConfigError("schema: expected object with fields domains[] and tables[]");

    Schema s;
    for (const auto& d : doc.at("domains")) {
        if (!d.is_string()) throw ConfigError("domains: entries must be strings");
        s.domains_.push_back(d.get<std::string>());
        check_symbol(s.domains_.back(), "domains");
    }
    if (s.domains_.empty()) throw ConfigError("domains: at least one domain is required");

    for (const auto& t : doc.at("tables")) {
        if (!t.is_object() || !t.contains("name") || !t.contains("properties"))
            throw ConfigError("tables: entries need fields name and properties[]");
        TableDecl table;
        table.name = t.at("name").get<std::string>();
        check_symbol(table.name, "tables.name");
        for (const auto& p : t.at("properties")) {
            if (!p.is_object() || !p.contains("name") || !p.contains("type"))
                throw ConfigError("properties: entries need fields name and type");
            PropertyDecl prop;
            prop.name = p.at("name").get<std::string>();
            prop.type = p.at("type").get<std::string>();
            check_symbol(prop.name, "properties.name");
            check_symbol(prop.type, "properties.type");
            if (p.contains("values"))
                for (const auto& v : p.at("values")) {
                    prop.values.push_back(v.get<std::string>());
                    check_symbol(prop.values.back(), "properties.values");
                }
            table.properties.push_back(std::move(prop));
        }
        s.tables_.push_back(std::move(table));
    }
    if (s.tables_.empty()) throw ConfigError("tables: at least one table is required");

    for (std::size_t i = 0; i < s.tables_.size(); ++i) {
        const TableDecl& t = s.tables_[i];
        s.table_names_.insert(t.name);
        const std::string& dom =
            s.domains_.size() == s.tables_.size() ? s.domains_[i] : s.domains_.front();
        s.table_domain_[t.name] = dom;
        for (const PropertyDecl& p : t.properties) {
            s.property_types_[p.name].push_back(p.type);
            s.type_names_.insert(p.type);
            for (const std::string& v : p.values) s.lexicon_.insert(v);
        }
    }
    return s;
}

bool Schema::has_table(std::string_view name) const {
    return table_names_.find(name) != table_names_.end();
}

bool Schema::has_property(std::string_view name) const {
    return property_types_.find(name) != property_types_.end();
}

const std::vector<std::string>* Schema::property_types(std::string_view name) const {
    auto it = property_types_.find(name);
    return it == property_types_.end() ? nullptr : &it->second;
}

bool Schema::has_type(std::string_view type) const {
    return type_names_.find(type) != type_names_.end();
}

bool Schema::is_lexicon_value(std::string_view text) const {
    return lexicon_.find(text) != lexicon_.end();
}

bool Schema::has_domain(std::string_view name) const {
    for (const std::string& d : domains_)
        if (d == name) return true;
    return false;
}

const std::string& Schema::domain_of_table(std::string_view table) const {
    auto it = table_domain_.find(std::string(table));
    if (it == table_domain_.end()) throw DataError("unknown table: " + std::string(table));
    return it->second;
}

}  // namespace divsamp
