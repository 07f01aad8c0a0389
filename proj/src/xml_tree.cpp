#include "xml_tree.hpp"

#include "sheetaudit/error.hpp"

#include <expat.h>

#include <limits>

namespace sheetaudit::detail {

namespace {

std::string local_name(const XML_Char* qualified) {
    std::string_view name(qualified);
    const auto colon = name.rfind(':');
    return std::string(colon == std::string_view::npos ? name : name.substr(colon + 1));
}

struct Builder {
    std::unique_ptr<XmlElement> root;
    std::vector<XmlElement*> stack;
};

void on_start(void* user, const XML_Char* name, const XML_Char** attributes) {
    auto& builder = *static_cast<Builder*>(user);
    auto element = std::make_unique<XmlElement>();
    element->name = local_name(name);
    for (const XML_Char** a = attributes; *a != nullptr; a += 2) element->attributes[local_name(a[0])] = a[1];
    XmlElement* raw = element.get();
    if (builder.stack.empty()) {
        builder.root = std::move(element);
    } else {
        builder.stack.back()->children.push_back(std::move(element));
    }
    builder.stack.push_back(raw);
}

void on_end(void* user, const XML_Char*) { static_cast<Builder*>(user)->stack.pop_back(); }

void on_text(void* user, const XML_Char* text, int length) {
    auto& builder = *static_cast<Builder*>(user);
    if (!builder.stack.empty()) builder.stack.back()->text.append(text, static_cast<std::size_t>(length));
}

struct ParserDeleter {
    void operator()(XML_ParserStruct* parser) const { XML_ParserFree(parser); }
};

void collect_text(const XmlElement& element, std::string& out) {
    out += element.text;
    for (const auto& child : element.children) collect_text(*child, out);
}

}  // namespace

const XmlElement* XmlElement::child(std::string_view child_name) const {
    for (const auto& c : children) {
        if (c->name == child_name) return c.get();
    }
    return nullptr;
}

std::vector<const XmlElement*> XmlElement::children_named(std::string_view child_name) const {
    std::vector<const XmlElement*> out;
    for (const auto& c : children) {
        if (c->name == child_name) out.push_back(c.get());
    }
    return out;
}

const std::string* XmlElement::attribute(std::string_view attribute_name) const {
    auto it = attributes.find(std::string(attribute_name));
    return it == attributes.end() ? nullptr : &it->second;
}

std::string XmlElement::deep_text() const {
    std::string out;
    collect_text(*this, out);
    return out;
}

std::unique_ptr<XmlElement> parse_xml(std::string_view document, const std::string& part) {
    if (document.size() > static_cast<std::size_t>(std::numeric_limits<int>::max()))
        throw MalformedWorkbook(part + ": document too large");
    std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreate("UTF-8"));
    if (!parser) throw MalformedWorkbook(part + ": cannot create xml parser");
    Builder builder;
    XML_SetUserData(parser.get(), &builder);
    XML_SetElementHandler(parser.get(), on_start, on_end);
    XML_SetCharacterDataHandler(parser.get(), on_text);
    if (XML_Parse(parser.get(), document.data(), static_cast<int>(document.size()), XML_TRUE) != XML_STATUS_OK) {
        throw MalformedWorkbook(part + ": " + XML_ErrorString(XML_GetErrorCode(parser.get())) + " at line " +
                                std::to_string(XML_GetCurrentLineNumber(parser.get())));
    }
    if (!builder.root) throw MalformedWorkbook(part + ": empty document");
    return std::move(builder.root);
}

}  // namespace sheetaudit::detail
