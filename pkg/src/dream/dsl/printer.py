"""Pretty-printer from ``System`` back to scenario text."""
from __future__ import annotations

from typing import Any

from ..core import ComponentType, Configuration
from ..errors import DreamError
from ..expr import Addr, BinOp, Call, Inst, Lit, NodeAttr, SetLit, UnOp, Var, VecLit
from ..foil import AndC, Conjunctive, Lifted, Macro, OrC, Quantified, Restriction
from ..maps import Map
from ..ops import AddEdge, AddNode, Assign, Create, Delete, If, Migrate, Move, RemoveEdge, RemoveNode, sort_ops
from ..pil import And, Const, Idle, Not, Or, PortLit, Pred
from ..pilops import AndTerm, OrTerm, Rule
from ..system import System


def value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, frozenset):
        return "{" + ", ".join(value(x) for x in sorted(v, key=repr)) + "}"
    if isinstance(v, tuple):
        if len(v) < 2:
            raise DreamError(f"cannot print vector {v!r}")
        return "(" + ", ".join(value(x) for x in v) + ")"
    raise DreamError(f"cannot print value {v!r}")


def _ref(r) -> str:
    return str(r.ref) if isinstance(r, Inst) else expr(r)


def expr(e) -> str:
    if isinstance(e, Lit):
        return value(e.value)
    if isinstance(e, Inst):
        return str(e.ref)
    if isinstance(e, Var):
        return f"{_ref(e.inst)}.{e.name}"
    if isinstance(e, Addr):
        return f"at({_ref(e.inst)})"
    if isinstance(e, NodeAttr):
        base = expr(e.node)
        return f"{base}.{e.name}" if isinstance(e.node, (Addr, VecLit, NodeAttr)) else f"({base}).{e.name}"
    if isinstance(e, BinOp):
        return f"({expr(e.left)} {e.op} {expr(e.right)})"
    if isinstance(e, UnOp):
        if e.op == "card":
            return f"card({expr(e.operand)})"
        return f"{e.op} ({expr(e.operand)})" if e.op == "not" else f"-({expr(e.operand)})"
    if isinstance(e, SetLit):
        return "{" + ", ".join(expr(x) for x in e.items) + "}"
    if isinstance(e, VecLit):
        return "(" + ", ".join(expr(x) for x in e.items) + ")"
    if isinstance(e, Call):
        return f"{e.name}(" + ", ".join(expr(x) for x in e.args) + ")"
    raise DreamError(f"cannot print expression {e!r}")


def formula(f) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, PortLit):
        return str(f.port)
    if isinstance(f, Pred):
        return expr(f.expr)
    if isinstance(f, Not):
        return f"not ({formula(f.operand)})"
    if isinstance(f, And):
        return "(" + " and ".join(formula(x) for x in f.items) + ")"
    if isinstance(f, Or):
        return "(" + " or ".join(formula(x) for x in f.items) + ")"
    if isinstance(f, Idle):
        return f"idle({f.instance})"
    raise DreamError(f"cannot print formula {f!r}")


def op(o) -> str:
    if isinstance(o, Assign):
        return f"{expr(o.target)} := {expr(o.value)}"
    if isinstance(o, If):
        s = f"if {expr(o.cond)} then {ops(o.then)}"
        return s + f" else {ops(o.orelse)}" if o.orelse else s
    if isinstance(o, Create):
        return f"create({o.type}, {expr(o.node)}" + (f", {o.motif})" if o.motif else ")")
    if isinstance(o, Delete):
        return f"delete({expr(o.inst)})"
    if isinstance(o, (AddNode, RemoveNode)):
        name = "addNode" if isinstance(o, AddNode) else "removeNode"
        return f"{name}({expr(o.node)}" + (f", {o.motif})" if o.motif else ")")
    if isinstance(o, (AddEdge, RemoveEdge)):
        name = "addEdge" if isinstance(o, AddEdge) else "removeEdge"
        return f"{name}({expr(o.source)}, {expr(o.target)}" + (f", {o.motif})" if o.motif else ")")
    if isinstance(o, Move):
        return f"move({expr(o.inst)}, {expr(o.node)})"
    if isinstance(o, Migrate):
        return f"migrate({expr(o.inst)}, {o.motif}, {expr(o.node)})"
    raise DreamError(f"cannot print operation {o!r}")


def ops(opset) -> str:
    if not opset:
        return "{}"
    return "{ " + "; ".join(op(o) for o in sort_ops(opset)) + " }"


def rule(r: Rule) -> str:
    return f"{formula(r.guard)} -> {ops(r.ops)}"


def pterm(t) -> str:
    if isinstance(t, Rule):
        return rule(t)
    sep = " & " if isinstance(t, AndTerm) else " | "
    return "(" + sep.join(pterm(x) for x in t.items) + ")"


def decls(ds) -> str:
    parts = []
    for d in ds:
        s = f"{d.var}: {d.type}" + (f" in {d.motif}" if d.motif else "")
        parts.append(f"{d.quant} {s}" if d.quant else s)
    return "[" + ", ".join(parts) + "]"


def term(rho) -> str:
    if isinstance(rho, Lifted):
        return pterm(rho.term) if isinstance(rho.term, Rule) else "(" + pterm(rho.term) + ")"
    if isinstance(rho, Quantified):
        body = rule(rho.body) if isinstance(rho.body, Rule) else "(" + pterm(rho.body) + ")"
        return f"{decls(rho.decls)} {body}"
    if isinstance(rho, Conjunctive):
        return f"{decls(rho.decls)} {rho.port} => {formula(rho.guard)} -> {ops(rho.ops)}"
    if isinstance(rho, Restriction):
        return f"AtMost({rho.n})({rho.type}" + (f".{rho.port})" if rho.port else ")")
    if isinstance(rho, Macro):
        k = f"({rho.k})" if rho.kind in ("AtMost", "AtLeast", "Exactly") else ""
        ports = ", ".join(f"{e.port}^{e.index}" for e in rho.entries)
        binds = ", ".join(f"{e.type}[{e.index}]" for e in rho.entries)
        pred = f" | {expr(rho.predicate)}" if rho.predicate is not None else ""
        return f"on {rho.anchor_type}.{rho.anchor_port} {rho.kind}{k} {ports} [{binds}{pred}]"
    if isinstance(rho, (AndC, OrC)):
        sep = "\n    & " if isinstance(rho, AndC) else "\n    | "
        return sep.join(_wrap(x) for x in rho.items)
    raise DreamError(f"cannot print term {rho!r}")


def _wrap(rho) -> str:
    s = term(rho)
    return f"({s})" if isinstance(rho, (AndC, OrC)) else s


def ctype(t: ComponentType) -> str:
    lines = [f"type {t.name} {{", f"  locations {', '.join(t.locations)};", f"  initial {t.initial};"]
    for v in t.variables:
        init = f" = {expr(v.init)}" if v.init is not None else ""
        lines.append(f"  var {v.name}: {v.type}{init};")
    if t.ports:
        lines.append(f"  ports {', '.join(t.ports)};")
    for tr in t.transitions:
        body = t.port_ops.get(tr.port)
        lines.append(f"  transition {tr.port}: {tr.source} -> {tr.target}" + (f" {ops(body)}" if body else "") + ";")
    lines.append("}")
    return "\n".join(lines)


def map_desc(m: Map) -> str:
    if m.removed or m.removed_edges or (m.kind != "explicit" and (m.nodes or m.edges)):
        raise DreamError("cannot print a map that was reconfigured")
    if m.kind == "torus":
        return f"map torus {m.size};"
    if m.kind == "grid":
        return "map grid;" if m.size is None else f"map grid {m.size};"
    s = "map nodes {" + ", ".join(value(n) for n in sorted(m.nodes, key=repr)) + "}"
    if m.edges:
        s += " edges {" + ", ".join(f"{value(a)} -> {value(b)}" for a, b in sorted(m.edges, key=repr)) + "}"
    return s + ";"


def motif_block(name: str, m: Map, rho) -> str:
    lines = [f"motif {name} {{", f"  {map_desc(m)}"]
    for a in m.attr_decls:
        lines.append(f"  node var {a.name}: {a.type} = {value(a.default)};")
    lines.append(f"  term {term(rho)};")
    lines.append("}")
    return "\n".join(lines)


def instances(cfg: Configuration) -> list[str]:
    if cfg.instance_ids() != list(range(1, len(cfg.instance_ids()) + 1)):
        raise DreamError("instance ids must be 1..n to be printed")
    out = []
    for cid in cfg.instance_ids():
        m = cfg.motif_of(cid)
        inst = cfg.instance(cid)
        st = cfg.motifs[m]
        where = f" at {value(st.address[cid])}" if cid in st.address else ""
        vals = "; ".join(f"{k} = {value(inst.valuation[k])}" for k in (v.name for v in inst.type.variables))
        if inst.location != inst.type.initial:
            raise DreamError(f"instance {cid} is not at its initial location")
        out.append(f"  instance {inst.type.name} in {m}{where}" + (f" {{ {vals} }}" if vals else "") + ";")
    return out


def system(s: System) -> str:
    """Scenario text that parses back to an equivalent system."""
    parts = [ctype(t) for t in s.types.values()]
    parts += [motif_block(name, s.initial.motifs[name].map, m.term) for name, m in s.motifs.items()]
    body = instances(s.initial)
    if s.migration is not None:
        body.append(f"  migration {term(s.migration)};")
    parts.append(f"system {s.name} {{\n" + "\n".join(body) + "\n}")
    run = [f"  steps {s.steps};", f"  seed {s.seed};"]
    for m in s.metrics:
        target = m.type + (f".{m.var}" if m.var else "")
        run.append(f"  metric {m.name} = {m.kind}({target});")
    parts.append("run {\n" + "\n".join(run) + "\n}")
    return "\n\n".join(parts) + "\n"
