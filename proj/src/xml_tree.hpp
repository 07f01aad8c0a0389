#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sheetaudit::detail {

/// Minimal element tree. Namespace prefixes are stripped from element and
/// attribute names ("r:id" becomes "id"); text is the concatenated
/// character data directly inside the element.
struct XmlElement {
    std::string name;
    std::map<std::string, std::string> attributes;
    std::vector<std::unique_ptr<XmlElement>> children;
    std::string text;

    const XmlElement* child(std::string_view child_name) const;
    std::vector<const XmlElement*> children_named(std::string_view child_name) const;
    const std::string* attribute(std::string_view attribute_name) const;
    /// Text of this element and all descendants, in document order.
    std::string deep_text() const;
};

/// Throws MalformedWorkbook on malformed markup; `part` names the source.
std::unique_ptr<XmlElement> parse_xml(std::string_view document, const std::string& part);

}  // namespace sheetaudit::detail
