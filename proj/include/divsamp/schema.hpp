#ifndef DIVSAMP_SCHEMA_HPP
#define DIVSAMP_SCHEMA_HPP

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace divsamp {

struct PropertyDecl {
    std::string name;
    std::string type;                 // Number, String, Boolean, Enum, Array(T), or a named type
    std::vector<std::string> values;  // entity lexicon, surface forms as they appear in queries
};

struct TableDecl {
    std::string name;
    std::vector<PropertyDecl> properties;
};

/// Per-corpus configuration: domains, tables, typed properties and entity
/// lexicons. Loaded from JSON with fields
/// domains[], tables[{name, properties[{name, type, values[]}]}].
class Schema {
  public:
    static Schema load(const std::string& path);
    static Schema from_json(const std::string& text);

    const std::vector<std::string>& domains() const { return domains_; }
    const std::vector<TableDecl>& tables() const { return tables_; }

    bool has_table(std::string_view name) const;  // bare name, no '@'
    bool has_property(std::string_view name) const;
    /// Types declared for a property name anywhere in the schema.
    const std::vector<std::string>* property_types(std::string_view name) const;
    bool has_type(std::string_view type) const;
    bool is_lexicon_value(std::string_view text) const;
    bool has_domain(std::string_view name) const;

    /// Domain owning a table: domains[i] pairs with tables[i] when the lists
    /// have equal length, otherwise every table maps to domains[0].
    const std::string& domain_of_table(std::string_view table) const;

  private:
    std::vector<std::string> domains_;
    std::vector<TableDecl> tables_;
    std::set<std::string, std::less<>> table_names_;
    std::map<std::string, std::vector<std::string>, std::less<>> property_types_;
    std::set<std::string, std::less<>> type_names_;
    std::set<std::string, std::less<>> lexicon_;
    std::map<std::string, std::string, std::less<>> table_domain_;
};

}  // namespace divsamp

#endif  // DIVSAMP_SCHEMA_HPP
