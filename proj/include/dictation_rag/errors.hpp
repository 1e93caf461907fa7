#pragma once

#include <stdexcept>
#include <string>

namespace dictation_rag {

struct MalformedRecord : std::runtime_error {
    int line_no;
    explicit MalformedRecord(int line, const std::string& what)
        : std::runtime_error("malformed record at line " + std::to_string(line) + ": " + what),
          line_no(line) {}
};

struct DuplicateId : std::runtime_error {
    explicit DuplicateId(const std::string& id)
        : std::runtime_error("duplicate id: " + id) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct DuplicateDocId : std::runtime_error {
    explicit DuplicateDocId(const std::string& id)
        : std::runtime_error("duplicate doc id: " + id) {}
};

struct UnknownDocId : std::runtime_error {
    explicit UnknownDocId(const std::string& id)
        : std::runtime_error("unknown doc id: " + id) {}
};

struct DimensionMismatch : std::runtime_error {
    DimensionMismatch(long a, long b)
        : std::runtime_error("vector dimension mismatch: " + std::to_string(a) +
                             " vs " + std::to_string(b)) {}
};

struct EmptyPool : std::runtime_error {
    explicit EmptyPool(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidQuery : std::runtime_error {
    explicit InvalidQuery(const std::string& what) : std::runtime_error(what) {}
};

struct MalformedOntology : std::runtime_error {
    explicit MalformedOntology(const std::string& what) : std::runtime_error(what) {}
};

struct DuplicateSchemaId : std::runtime_error {
    explicit DuplicateSchemaId(const std::string& id)
        : std::runtime_error("duplicate schema id: " + id) {}
};

struct DescriptionEmpty : std::runtime_error {
    explicit DescriptionEmpty(const std::string& schema_id)
        : std::runtime_error("empty description generated for schema: " + schema_id) {}
};

struct MissingBinding : std::runtime_error {
    explicit MissingBinding(const std::string& name)
        : std::runtime_error("missing template binding: " + name) {}
};

struct UnknownPlaceholder : std::runtime_error {
    explicit UnknownPlaceholder(const std::string& name)
        : std::runtime_error("binding does not appear in template: " + name) {}
};

struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

struct MockMiss : std::runtime_error {
    explicit MockMiss(const std::string& fingerprint)
        : std::runtime_error("no scripted response for fingerprint " + fingerprint) {}
};

struct ProviderUnavailable : std::runtime_error {
    explicit ProviderUnavailable(const std::string& what) : std::runtime_error(what) {}
};

struct SegmentParseError : std::runtime_error {
    explicit SegmentParseError(const std::string& what) : std::runtime_error(what) {}
};

struct ObservationParseError : std::runtime_error {
    explicit ObservationParseError(const std::string& what) : std::runtime_error(what) {}
};

struct PairParseError : std::runtime_error {
    explicit PairParseError(const std::string& what) : std::runtime_error(what) {}
};

struct SegmentationError : std::runtime_error {
    explicit SegmentationError(const std::string& what) : std::runtime_error(what) {}
};

struct MalformedEntry : std::runtime_error {
    int line_no;
    explicit MalformedEntry(int line, const std::string& what)
        : std::runtime_error("malformed bank entry at line " + std::to_string(line) + ": " + what),
          line_no(line) {}
};

struct UnknownPredictionId : std::runtime_error {
    explicit UnknownPredictionId(const std::string& id)
        : std::runtime_error("prediction id not present in gold corpus: " + id) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dictation_rag
