#pragma once

// Thin UTF-8 helpers over ICU. Every string in lexigen is UTF-8 in a std::string;
// ICU is only touched at these boundaries.

#include <cstdint>
#include <string>
#include <string_view>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "lexigen/error.hpp"

namespace lexigen::unicode {

inline bool is_valid_utf8(std::string_view s) {
    const auto *p = reinterpret_cast<const uint8_t *>(s.data());
    const auto n = static_cast<int32_t>(s.size());
    int32_t i = 0;
    while (i < n) {
        UChar32 c;
        U8_NEXT(p, i, n, c);
        if (c < 0)
            return false;
    }
    return true;
}

inline void require_utf8(std::string_view s, std::string_view what) {
    if (!is_valid_utf8(s))
        throw EncodingError(std::string(what) + ": input is not valid UTF-8");
}

// Decodes valid UTF-8; invalid sequences become U+FFFD.
inline std::u32string code_points(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    const auto *p = reinterpret_cast<const uint8_t *>(s.data());
    const auto n = static_cast<int32_t>(s.size());
    int32_t i = 0;
    while (i < n) {
        UChar32 c;
        U8_NEXT(p, i, n, c);
        out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
    }
    return out;
}

inline void append_utf8(std::string &out, char32_t c) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t len = 0;
    UBool err = false;
    U8_APPEND(buf, len, U8_MAX_LENGTH, static_cast<UChar32>(c), err);
    if (!err)
        out.append(reinterpret_cast<const char *>(buf), static_cast<std::size_t>(len));
}

inline std::size_t count_code_points(std::string_view s) {
    const auto *p = reinterpret_cast<const uint8_t *>(s.data());
    const auto n = static_cast<int32_t>(s.size());
    int32_t i = 0;
    std::size_t count = 0;
    while (i < n) {
        UChar32 c;
        U8_NEXT(p, i, n, c);
        ++count;
    }
    return count;
}

namespace detail {

inline icu::UnicodeString to_icu(std::string_view s) {
    return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

inline std::string from_icu(const icu::UnicodeString &u) {
    std::string out;
    u.toUTF8String(out);
    return out;
}

inline icu::UnicodeString normalize(const icu::Normalizer2 *norm, const icu::UnicodeString &u) {
    UErrorCode status = U_ZERO_ERROR;
    icu::UnicodeString out = norm->normalize(u, status);
    if (U_FAILURE(status))
        throw EncodingError(std::string("unicode normalization failed: ") + u_errorName(status));
    return out;
}

inline const icu::Normalizer2 *nfc_instance() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2 *n = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status))
        throw EncodingError("ICU NFC normalizer unavailable");
    return n;
}

inline const icu::Normalizer2 *nfd_instance() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2 *n = icu::Normalizer2::getNFDInstance(status);
    if (U_FAILURE(status))
        throw EncodingError("ICU NFD normalizer unavailable");
    return n;
}

} // namespace detail

inline std::string nfc(std::string_view s) {
    return detail::from_icu(detail::normalize(detail::nfc_instance(), detail::to_icu(s)));
}

// NFC + full Unicode lowercase (root locale).
inline std::string nfc_lower(std::string_view s) {
    icu::UnicodeString u = detail::normalize(detail::nfc_instance(), detail::to_icu(s));
    u.toLower(icu::Locale::getRoot());
    return detail::from_icu(detail::normalize(detail::nfc_instance(), u));
}

inline std::string to_upper(std::string_view s) {
    icu::UnicodeString u = detail::to_icu(s);
    u.toUpper(icu::Locale::getRoot());
    return detail::from_icu(u);
}

// Strips combining marks after canonical decomposition: "napoleón" -> "napoleon".
inline std::string fold_diacritics(std::string_view s) {
    const icu::UnicodeString decomposed = detail::normalize(detail::nfd_instance(), detail::to_icu(s));
    icu::UnicodeString kept;
    for (int32_t i = 0; i < decomposed.length();) {
        const UChar32 c = decomposed.char32At(i);
        if (u_charType(c) != U_NON_SPACING_MARK)
            kept.append(c);
        i += U16_LENGTH(c);
    }
    return detail::from_icu(detail::normalize(detail::nfc_instance(), kept));
}

inline bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }

inline bool is_punct(char32_t c) { return u_ispunct(static_cast<UChar32>(c)); }

// Trims Unicode whitespace from both ends.
inline std::string trim(std::string_view s) {
    const std::u32string cps = code_points(s);
    std::size_t b = 0, e = cps.size();
    while (b < e && is_space(cps[b]))
        ++b;
    while (e > b && is_space(cps[e - 1]))
        --e;
    std::string out;
    for (std::size_t i = b; i < e; ++i)
        append_utf8(out, cps[i]);
    return out;
}

} // namespace lexigen::unicode
