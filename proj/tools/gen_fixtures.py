#!/usr/bin/env python3
"""Writes the benchmark fixture pairs as SV and, given the wlec binary, as IR.

Each implementation is the specification after hand-applying catalogue rules.
The VBSME, FIR, box-filter and ADPCM designs are re-derivations from one-line
benchmark descriptions, not the original benchmark sources.

usage: gen_fixtures.py OUT_DIR [WLEC_BINARY]
"""

import math
import pathlib
import subprocess
import sys


def module(name, header, inputs, output, body):
    lines = [f"// {line}" if line else "//" for line in header]
    ports = [n for n, _ in inputs] + [output[0]]
    lines.append(f"module {name}({', '.join(ports)});")
    for n, w in inputs:
        lines.append(f"  input  [{w - 1}:0] {n};")
    lines.append(f"  output [{output[1] - 1}:0] {output[0]};")
    lines += [f"  {line}" for line in body]
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def absdiff_body(n, p):
    body = [f"wire [{p - 1}:0] d{i};" for i in range(n)]
    body += [f"assign d{i} = a{i} > b{i} ? a{i} - b{i} : b{i} - a{i};" for i in range(n)]
    return body


def balanced(terms, widths, prefix, body):
    """Pairs terms level by level into exact-width wires; returns the root."""
    level = 0
    while len(terms) > 2:
        nxt, nw = [], []
        for k in range(0, len(terms), 2):
            w = max(widths[k], widths[k + 1]) + 1
            name = f"{prefix}{level}_{k // 2}"
            body.append(f"wire [{w - 1}:0] {name};")
            body.append(f"assign {name} = {terms[k]} + {terms[k + 1]};")
            nxt.append(name)
            nw.append(w)
        terms, widths, level = nxt, nw, level + 1
    return f"{terms[0]} + {terms[1]}"


def vbsme(n, p, suffix):
    note = [
        f"Sum of absolute differences over {n} pixel pairs ({p}-bit pixels).",
        "Re-derived from the benchmark description; not the original source.",
    ]
    inputs = [(f"{x}{i}", p) for i in range(n) for x in "ab"]
    w = p + int(math.log2(n))
    spec_body = absdiff_body(n, p) + [f"assign y = {' + '.join(f'd{i}' for i in range(n))};"]
    impl_body = absdiff_body(n, p)
    root = balanced([f"d{i}" for i in range(n)], [p] * n, "s", impl_body)
    impl_body.append(f"assign y = {root};")
    tag = f"vbsme{n}{suffix}"
    return {
        f"{tag}_spec": module(f"{tag}_spec", note + ["Linear accumulation."], inputs, ("y", w), spec_body),
        f"{tag}_impl": module(
            f"{tag}_impl", note + ["Balanced adder tree (assoc-add, zext-absorb)."], inputs, ("y", w), impl_body
        ),
    }


FIR_COEFFS = [2, 4, 8, 16, 16, 8, 4, 2]


def fir(p, suffix):
    note = [
        f"Eight-tap FIR filter with power-of-two coefficients ({p}-bit samples).",
        "Re-derived from the benchmark description; not the original source.",
    ]
    inputs = [(f"x{i}", p) for i in range(8)]
    w = p + int(math.log2(sum(FIR_COEFFS))) + 1
    spec_body = [f"assign y = {' + '.join(f'x{i} * 5{chr(39)}d{c}' for i, c in enumerate(FIR_COEFFS))};"]
    impl_body, widths = [], []
    for i, c in enumerate(FIR_COEFFS):
        k = int(math.log2(c))
        tw = p + k
        impl_body.append(f"wire [{tw - 1}:0] t{i};")
        impl_body.append(f"assign t{i} = x{i} << {k.bit_length()}'d{k};")
        widths.append(tw)
    root = balanced([f"t{i}" for i in range(8)], widths, "s", impl_body)
    impl_body.append(f"assign y = {root};")
    tag = f"fir8{suffix}"
    return {
        f"{tag}_spec": module(f"{tag}_spec", note + ["Direct form."], inputs, ("y", w), spec_body),
        f"{tag}_impl": module(
            f"{tag}_impl",
            note + ["Shifts for the coefficients and a balanced adder tree (mult-to-shift, assoc-add)."],
            inputs,
            ("y", w),
            impl_body,
        ),
    }


def box(p, suffix):
    note = [
        f"Three-tap box filter with a selectable gain of 3 or 5 ({p}-bit pixels).",
        "Re-derived from the benchmark description; not the original source.",
        "The implementation factors the gain out of the select and re-associates",
        "the window sum. Factoring through a mux is not in the rule catalogue.",
    ]
    inputs = [("p0", p), ("p1", p), ("p2", p), ("sel", 1)]
    w = p + 5
    spec_body = [
        f"wire [{p + 1}:0] s;",
        "assign s = p0 + p1 + p2;",
        "assign y = sel ? s * 3'd3 : s * 3'd5;",
    ]
    impl_body = [
        f"wire [{p}:0] t;",
        f"wire [{p + 1}:0] s;",
        "wire [2:0] k;",
        "assign t = p1 + p2;",
        "assign s = p0 + t;",
        "assign k = sel ? 3'd3 : 3'd5;",
        "assign y = s * k;",
    ]
    tag = f"box{suffix}"
    return {
        f"{tag}_spec": module(f"{tag}_spec", note, inputs, ("y", w), spec_body),
        f"{tag}_impl": module(f"{tag}_impl", note, inputs, ("y", w), impl_body),
    }


def adpcm(p, q, suffix):
    note = [
        f"ADPCM-style step scaling: a {q}-bit code times a {p}-bit step size,",
        "scaled by four and by a 2-bit exponent.",
        "Re-derived from the benchmark description; not the original source.",
    ]
    inputs = [("step", p), ("code", q), ("e", 2)]
    w = p + q + 6
    spec_body = [
        f"wire [{q + 2}:0] c4;",
        f"wire [{p + q + 2}:0] m;",
        "assign c4 = code * 3'd4;",
        "assign m = step * c4;",
        "assign y = m << e;",
    ]
    impl_body = [
        f"wire [{p + q - 1}:0] m;",
        "wire [2:0] k;",
        "assign m = step * code;",
        "assign k = e + 2'd2;",
        "assign y = m << k;",
    ]
    tag = f"adpcm{suffix}"
    return {
        f"{tag}_spec": module(f"{tag}_spec", note + ["Multiply, then shift."], inputs, ("y", w), spec_body),
        f"{tag}_impl": module(
            f"{tag}_impl",
            note + ["Narrow product with one combined shift (mult-to-shift, mult-left-shift, merge-shift)."],
            inputs,
            ("y", w),
            impl_body,
        ),
    }


def fig4():
    note = ["Toy pair: (2x) >> 1 against x."]
    inputs = [("x", 8)]
    spec_body = ["wire [8:0] p;", "assign p = x * 2'd2;", "assign y = p >> 1'd1;"]
    return {
        "fig4_spec": module("fig4_spec", note, inputs, ("y", 8), spec_body),
        "fig4_impl": module("fig4_impl", note, inputs, ("y", 8), ["assign y = x;"]),
    }


def all_fixtures():
    out = {}
    out.update(fig4())
    out.update(vbsme(4, 8, ""))
    out.update(vbsme(4, 2, "_small"))
    out.update(vbsme(8, 8, ""))
    out.update(vbsme(8, 1, "_small"))
    out.update(fir(8, ""))
    out.update(fir(2, "_small"))
    out.update(box(8, ""))
    out.update(box(5, "_small"))
    out.update(adpcm(16, 4, ""))
    out.update(adpcm(10, 4, "_small"))
    return out


def main():
    if len(sys.argv) not in (2, 3):
        sys.exit(__doc__)
    out = pathlib.Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    for name, text in all_fixtures().items():
        (out / f"{name}.sv").write_text(text)
    if len(sys.argv) == 3:
        for sv in sorted(out.glob("*.sv")):
            ir = sv.with_suffix(".ir")
            subprocess.run([sys.argv[2], "convert", "--in", str(sv), "--out", str(ir)], check=True)
            header = [f";{line[2:]}" for line in sv.read_text().splitlines() if line.startswith("//")]
            ir.write_text("".join(f"{line}\n" for line in header) + ir.read_text())


if __name__ == "__main__":
    main()
