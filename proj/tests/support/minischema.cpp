#include "minischema.hpp"

namespace testsupport {

using nsopt::json;

namespace {

struct Checker {
    const json& root;
    std::vector<std::string> problems;

    void note(const std::string& path, const std::string& what) {
        problems.push_back(path + ": " + what);
    }

    const json& resolve(const json& schema) {
        if (schema.is_object() && schema.contains("$ref")) {
            std::string ref = schema["$ref"].get<std::string>();
            const std::string prefix = "#/definitions/";
            if (ref.rfind(prefix, 0) == 0) {
                const json& defs = root.at("definitions");
                return defs.at(ref.substr(prefix.size()));
            }
            throw std::runtime_error("unsupported $ref: " + ref);
        }
        return schema;
    }

    static bool type_matches(const std::string& t, const json& doc) {
        if (t == "object") return doc.is_object();
        if (t == "array") return doc.is_array();
        if (t == "string") return doc.is_string();
        if (t == "number") return doc.is_number();
        if (t == "integer") return doc.is_number_integer();
        if (t == "boolean") return doc.is_boolean();
        if (t == "null") return doc.is_null();
        throw std::runtime_error("unsupported type: " + t);
    }

    void check(const json& schema_in, const json& doc, const std::string& path) {
        const json& schema = resolve(schema_in);

        if (schema.contains("oneOf")) {
            int matched = 0;
            for (const json& alt : schema["oneOf"]) {
                Checker sub{root, {}};
                sub.check(alt, doc, path);
                if (sub.problems.empty()) ++matched;
            }
            if (matched != 1)
                note(path, "matches " + std::to_string(matched) + " oneOf alternatives, need 1");
            return;
        }

        if (schema.contains("const")) {
            if (doc != schema["const"]) note(path, "does not equal the const value");
            return;
        }

        if (schema.contains("type") && !type_matches(schema["type"].get<std::string>(), doc)) {
            note(path, "expected type " + schema["type"].get<std::string>());
            return;
        }

        if (schema.contains("exclusiveMinimum") && doc.is_number() &&
            !(doc.get<double>() > schema["exclusiveMinimum"].get<double>()))
            note(path, "must be > " + schema["exclusiveMinimum"].dump());

        if (doc.is_object()) {
            if (schema.contains("required"))
                for (const json& key : schema["required"])
                    if (!doc.contains(key.get<std::string>()))
                        note(path, "missing required key '" + key.get<std::string>() + "'");
            const json props = schema.value("properties", json::object());
            bool extra_ok = true;
            if (schema.contains("additionalProperties") &&
                schema["additionalProperties"].is_boolean())
                extra_ok = schema["additionalProperties"].get<bool>();
            for (auto it = doc.begin(); it != doc.end(); ++it) {
                if (props.contains(it.key()))
                    check(props[it.key()], it.value(), path + "/" + it.key());
                else if (!extra_ok)
                    note(path, "unexpected key '" + it.key() + "'");
            }
        }

        if (doc.is_array()) {
            if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>())
                note(path, "fewer than minItems elements");
            if (schema.contains("maxItems") && doc.size() > schema["maxItems"].get<std::size_t>())
                note(path, "more than maxItems elements");
            if (schema.contains("items"))
                for (std::size_t i = 0; i < doc.size(); ++i)
                    check(schema["items"], doc[i], path + "/" + std::to_string(i));
        }
    }
};

} // namespace

std::vector<std::string> schema_check(const json& schema, const json& doc) {
    Checker c{schema, {}};
    c.check(schema, doc, "$");
    return c.problems;
}

} // namespace testsupport
