#!/usr/bin/env python3
"""Regenerates include/lexigen/wordlists.hpp from data/wordlists/*.txt."""
import pathlib

root = pathlib.Path(__file__).resolve().parent.parent
lists = {"kSpanishFunctionWords": "es_function_words.txt",
         "kEnglishFunctionWords": "en_function_words.txt"}

out = ["#pragma once", "",
       "// Generated by tools/gen_wordlists.py from data/wordlists/. Do not edit.", "",
       "#include <string_view>", "", "namespace lexigen::wordlists {", ""]
for name, fname in lists.items():
    words = [w.strip() for w in (root / "data" / "wordlists" / fname).read_text("utf-8").splitlines()
             if w.strip() and not w.startswith("#")]
    out.append(f"inline constexpr std::string_view {name}[] = {{")
    line = "   "
    for w in words:
        item = f' "{w}",'
        if len(line) + len(item) > 96:
            out.append(line)
            line = "   "
        line += item
    out.append(line)
    out.append("};")
    out.append("")
out.append("} // namespace lexigen::wordlists")
(root / "include" / "lexigen" / "wordlists.hpp").write_text("\n".join(out) + "\n", "utf-8")
