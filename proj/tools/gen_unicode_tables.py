#!/usr/bin/env python3
# Copyright 2026 The qaprobe Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates include/qaprobe/unicode_tables.hpp from unicodedata."""

import pathlib
import unicodedata

HEADER = pathlib.Path(__file__).resolve().parent.parent / "include" / "qaprobe" / "unicode_tables.hpp"


def ranges(pred):
    out, start, prev = [], None, None
    for cp in range(0x110000):
        if pred(chr(cp)):
            if start is None:
                start = cp
            prev = cp
        elif start is not None:
            out.append((start, prev))
            start = None
    if start is not None:
        out.append((start, prev))
    return out


def main():
    punct = ranges(lambda c: unicodedata.category(c).startswith("P"))
    space = ranges(str.isspace)
    lines = [
        "// Copyright 2026 The qaprobe Authors",
        "//",
        '// Licensed under the Apache License, Version 2.0 (the "License");',
        "// you may not use this file except in compliance with the License.",
        "// You may obtain a copy of the License at",
        "//",
        "//      http://www.apache.org/licenses/LICENSE-2.0",
        "//",
        "// Unless required by applicable law or agreed to in writing, software",
        '// distributed under the License is distributed on an "AS IS" BASIS,',
        "// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.",
        "// See the License for the specific language governing permissions and",
        "// limitations under the License.",
        "",
        "// Generated by tools/gen_unicode_tables.py (Unicode %s). Do not edit." % unicodedata.unidata_version,
        "",
        "#pragma once",
        "",
        "#include <array>",
        "#include <cstdint>",
        "",
        "namespace qaprobe::unicode_tables {",
        "",
        "struct Range {",
        "  char32_t first;",
        "  char32_t last;",
        "};",
        "",
    ]
    for name, table in (("kPunctuation", punct), ("kWhitespace", space)):
        lines.append("inline constexpr std::array<Range, %d> %s = {{" % (len(table), name))
        for a, b in table:
            lines.append("    {0x%04X, 0x%04X}," % (a, b))
        lines.append("}};")
        lines.append("")
    lines.append("}  // namespace qaprobe::unicode_tables")
    HEADER.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
