#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace svgtk {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// svg_model
struct MalformedXml : Error {
    explicit MalformedXml(const std::string& what) : Error("malformed XML: " + what) {}
};
struct UnsupportedElement : Error {
    std::string tag;
    explicit UnsupportedElement(std::string t)
        : Error("unsupported element <" + t + ">"), tag(std::move(t)) {}
};
struct UnsupportedAttribute : Error {
    explicit UnsupportedAttribute(const std::string& what) : Error("unsupported attribute: " + what) {}
};
struct MissingViewbox : Error {
    MissingViewbox() : Error("missing viewBox and width/height") {}
};
struct BadPathData : Error {
    std::size_t position;
    BadPathData(std::size_t pos, const std::string& what)
        : Error("bad path data at offset " + std::to_string(pos) + ": " + what), position(pos) {}
};
struct NonAffineBakeUnsupported : Error {
    NonAffineBakeUnsupported()
        : Error("cannot bake anisotropic transform into a radial gradient") {}
};
struct InvalidDocument : Error {
    explicit InvalidDocument(const std::string& what) : Error("invalid document: " + what) {}
};

// normalize
struct DegenerateViewbox : Error {
    DegenerateViewbox() : Error("viewBox width and height must be positive") {}
};

// tokenize
struct NotNormalized : Error {
    explicit NotNormalized(const std::string& what) : Error("document not normalized: " + what) {}
};
struct GrammarViolation : Error {
    std::size_t position;
    std::string expected;
    std::string found;
    GrammarViolation(std::size_t pos, std::string exp, std::string got)
        : Error("grammar violation at token " + std::to_string(pos) + ": expected " + exp +
                ", found " + got),
          position(pos), expected(std::move(exp)), found(std::move(got)) {}
};

// augment / metrics
struct EmptyDocument : Error {
    EmptyDocument() : Error("document has no drawable elements") {}
};
struct DimensionMismatch : Error {
    DimensionMismatch() : Error("image dimensions do not match") {}
};

// raster / io
struct BadCommandOrder : Error {
    explicit BadCommandOrder(const std::string& what) : Error("bad command order: " + what) {}
};
struct IoError : Error {
    explicit IoError(const std::string& what) : Error("I/O error: " + what) {}
};

// decode
struct LengthMismatch : Error {
    LengthMismatch() : Error("logit vectors differ in length") {}
};
struct EmptyCandidates : Error {
    EmptyCandidates() : Error("candidate list is empty") {}
};
struct GeneratorProtocolError : Error {
    explicit GeneratorProtocolError(const std::string& what)
        : Error("generator protocol error: " + what) {}
};

}  // namespace svgtk
