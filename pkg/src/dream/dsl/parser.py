"""Recursive-descent parser from scenario text to a ``System``.

Blocks must appear in dependency order: component types first, then
motifs, then the ``system`` block with instances, then an optional ``run``
block. Ports and variables are told apart through the declared type of the
component variable in front of the dot.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..core import VALUE_TYPES, ComponentType, Configuration, MotifState, Port, Transition, VarDecl, default_value, instantiate
from ..errors import DreamError, ModelError
from ..expr import Addr, BinOp, Call, Expr, Inst, Lit, NodeAttr, SetLit, UnOp, Var, VecLit, evaluate
from ..foil import (
    AndC,
    Conjunctive,
    Decl,
    Lifted,
    Macro,
    MacroEntry,
    OrC,
    Quantified,
    Restriction,
    check_well_formed,
)
from ..maps import AttrDecl, Map, explicit_map, grid_map, torus_map
from ..motif import Motif
from ..ops import AddEdge, AddNode, Assign, Create, Delete, If, Migrate, Move, RemoveEdge, RemoveNode
from ..pil import FALSE, TRUE, And, Formula, Idle, Not, Or, PortLit, Pred
from ..pilops import AndTerm, OrTerm, Rule
from ..system import METRIC_KINDS, Metric, System
from .lexer import Diagnostic, ParseError, Token, tokenize

MACRO_NAMES = ("Require", "Accept", "AtMost", "AtLeast", "Unique", "Exactly")
COMPARISONS = ("=", "!=", "<", "<=", ">", ">=", "in")
TERM_END = ("&", "|", ")", ";", "]")


@dataclass(frozen=True)
class _PortRef(Expr):
    port: Port


@dataclass(frozen=True)
class _IdleRef(Expr):
    instance: str


@dataclass
class _Scope:
    vars: dict[str, str] = field(default_factory=dict)  # component variable -> type name
    owner: str | None = None  # type whose bare variable names resolve to self.x

    def bind(self, name: str, tname: str) -> "_Scope":
        return _Scope({**self.vars, name: tname}, self.owner)


@dataclass
class _Instance:
    type: str
    motif: str
    node: Any
    values: dict[str, Any]
    token: Token


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.types: dict[str, ComponentType] = {}
        self.maps: dict[str, Map] = {}
        self.terms: dict[str, Any] = {}
        self.term_pos: dict[str, Token] = {}
        self.instances: list[_Instance] = []
        self.migration = None
        self.migration_pos: Token | None = None
        self.steps = 20
        self.seed = 0
        self.metrics: list[Metric] = []
        self.name = "system"

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, msg: str, tok: Token | None = None):
        t = tok or self.tok
        raise ParseError([Diagnostic(t.line, t.col, msg)])

    def at(self, *texts: str) -> bool:
        return self.tok.kind in ("sym", "ident") and self.tok.text in texts

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.fail(f"expected {text!r}, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "ident":
            self.fail(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        t = self.tok.text
        self.i += 1
        return t

    def integer(self) -> int:
        neg = self.accept("-")
        if self.tok.kind != "int":
            self.fail(f"expected an integer, found {self.tok.text or 'end of input'!r}")
        v = int(self.tok.text)
        self.i += 1
        return -v if neg else v

    # -- file --------------------------------------------------------------------

    def parse(self) -> System:
        while self.tok.kind != "eof":
            if self.at("type"):
                self.type_block()
            elif self.at("motif"):
                self.motif_block()
            elif self.at("system"):
                self.system_block()
            elif self.at("run"):
                self.run_block()
            else:
                self.fail(f"expected 'type', 'motif', 'system' or 'run', found {self.tok.text!r}")
        return self.build()

    # -- component types ---------------------------------------------------------

    def type_block(self):
        start = self.expect("type")
        name = self.ident("type name")
        if name in self.types:
            self.fail(f"type {name!r} declared twice", start)
        self.expect("{")
        locations: list[str] = []
        initial = None
        variables: list[VarDecl] = []
        ports: list[str] = []
        raw_transitions: list[tuple[Token, str, str, str, int | None]] = []
        while not self.accept("}"):
            if self.accept("locations"):
                locations += self.name_list()
            elif self.accept("initial"):
                initial = self.ident("location")
            elif self.accept("var"):
                variables.append(self.var_decl(_Scope()))
            elif self.accept("ports"):
                ports += self.name_list()
            elif self.at("transition"):
                t = self.expect("transition")
                port = self.ident("port")
                self.expect(":")
                src = self.ident("location")
                self.expect("->")
                dst = self.ident("location")
                body_at = self.i if self.at("{") else None
                if body_at is not None:
                    self.skip_block()
                raw_transitions.append((t, port, src, dst, body_at))
            else:
                self.fail(f"unexpected {self.tok.text!r} in type {name}")
            self.accept(";")
        # port-local operations see the type's own variables, so parse them once the type is known
        try:
            bare = ComponentType(name, tuple(locations), initial if initial is not None else (locations[0] if locations else ""),
                                 tuple(variables), tuple(ports), tuple(Transition(s, p, d) for _, p, s, d, _ in raw_transitions))
        except ModelError as exc:
            self.fail(str(exc), start)
        if initial is None:
            self.fail(f"type {name} has no initial location", start)
        self.types[name] = bare
        port_ops = {}
        resume = self.i
        for _, port, _, _, body_at in raw_transitions:
            if body_at is not None:
                self.i = body_at
                port_ops[port] = self.ops_block(_Scope({"self": name}, owner=name))
        self.i = resume
        self.types[name] = ComponentType(bare.name, bare.locations, bare.initial, bare.variables, bare.ports, bare.transitions, port_ops)

    def skip_block(self):
        depth = 0
        while True:
            if self.tok.kind == "eof":
                self.fail("unterminated block")
            if self.at("{"):
                depth += 1
            elif self.at("}"):
                depth -= 1
                if depth == 0:
                    self.i += 1
                    return
            self.i += 1

    def name_list(self) -> list[str]:
        out = [self.ident()]
        while self.accept(","):
            out.append(self.ident())
        return out

    def var_decl(self, scope: _Scope) -> VarDecl:
        name = self.ident("variable name")
        self.expect(":")
        vtype = self.ident("value type")
        if vtype not in VALUE_TYPES:
            self.fail(f"unknown value type {vtype!r}; expected one of {', '.join(VALUE_TYPES)}")
        init = self.expr(scope) if self.accept("=") else None
        return VarDecl(name, vtype, init)

    # -- motifs --------------------------------------------------------------------

    def motif_block(self):
        start = self.expect("motif")
        name = self.ident("motif name")
        if name in self.maps:
            self.fail(f"motif {name!r} declared twice", start)
        self.expect("{")
        kind, size, nodes, edges = "explicit", None, [], []
        attrs: list[AttrDecl] = []
        term = None
        while not self.accept("}"):
            if self.accept("map"):
                kind, size, nodes, edges = self.map_desc()
            elif self.accept("node"):
                self.expect("var")
                tok = self.tok
                d = self.var_decl(_Scope())
                try:
                    default = evaluate(d.init) if d.init is not None else default_value(d.type)
                except DreamError as exc:
                    self.fail(str(exc), tok)
                attrs.append(AttrDecl(d.name, d.type, default))
            elif self.at("term"):
                self.expect("term")
                self.term_pos[name] = self.tok
                term = self.term(_Scope())
            else:
                self.fail(f"unexpected {self.tok.text!r} in motif {name}")
            self.accept(";")
        try:
            if kind == "torus":
                m = torus_map(size, attrs)
            elif kind == "grid":
                m = grid_map(size, attrs)
            else:
                m = explicit_map(nodes, edges, attrs)
        except ModelError as exc:
            self.fail(str(exc), start)
        self.maps[name] = m
        self.terms[name] = term if term is not None else Lifted(Rule(TRUE))
        self.term_pos.setdefault(name, start)

    def map_desc(self):
        if self.accept("torus"):
            return "torus", self.integer(), [], []
        if self.accept("grid"):
            size = self.integer() if self.tok.kind == "int" else None
            return "grid", size, [], []
        self.expect("nodes")
        self.expect("{")
        nodes = []
        if not self.at("}"):
            nodes.append(self.value())
            while self.accept(","):
                nodes.append(self.value())
        self.expect("}")
        edges = []
        if self.accept("edges"):
            self.expect("{")
            if not self.at("}"):
                while True:
                    a = self.value()
                    self.expect("->")
                    edges.append((a, self.value()))
                    if not self.accept(","):
                        break
            self.expect("}")
        return "explicit", None, nodes, edges

    def value(self) -> Any:
        tok = self.tok
        e = self.expr(_Scope())
        try:
            return evaluate(e)
        except DreamError as exc:
            self.fail(f"not a constant: {exc}", tok)

    # -- system and run blocks -----------------------------------------------------

    def system_block(self):
        self.expect("system")
        if self.tok.kind == "ident" and not self.at("{"):
            self.name = self.ident()
        self.expect("{")
        while not self.accept("}"):
            if self.at("instance"):
                tok = self.expect("instance")
                tname = self.ident("type name")
                if tname not in self.types:
                    self.fail(f"unknown component type {tname!r}", tok)
                self.expect("in")
                mname = self.ident("motif name")
                if mname not in self.maps:
                    self.fail(f"unknown motif {mname!r}", tok)
                node = self.value() if self.accept("at") else None
                values = {}
                if self.accept("{"):
                    while not self.accept("}"):
                        vtok = self.tok
                        var = self.ident("variable name")
                        self.expect("=")
                        values[var] = self.value()
                        if not self.types[tname].has_var(var):
                            self.fail(f"{tname} has no variable {var!r}", vtok)
                        if not self.at("}"):
                            if not self.accept(";"):
                                self.expect(",")
                self.instances.append(_Instance(tname, mname, node, values, tok))
            elif self.accept("migration"):
                self.migration_pos = self.tok
                self.migration = self.term(_Scope())
            else:
                self.fail(f"unexpected {self.tok.text!r} in system block")
            self.accept(";")

    def run_block(self):
        self.expect("run")
        self.expect("{")
        while not self.accept("}"):
            if self.accept("steps"):
                self.steps = self.integer()
            elif self.accept("seed"):
                self.seed = self.integer()
            elif self.at("metric"):
                tok = self.expect("metric")
                name = self.ident("metric name")
                self.expect("=")
                kind = self.ident("metric kind")
                if kind not in METRIC_KINDS:
                    self.fail(f"unknown metric kind {kind!r}; expected one of {', '.join(METRIC_KINDS)}")
                self.expect("(")
                tname = self.ident("type name")
                var = self.ident("variable name") if self.accept(".") else None
                self.expect(")")
                if tname not in self.types:
                    self.fail(f"unknown component type {tname!r}", tok)
                if var is not None and not self.types[tname].has_var(var):
                    self.fail(f"{tname} has no variable {var!r}", tok)
                try:
                    self.metrics.append(Metric(name, kind, tname, var))
                except DreamError as exc:
                    self.fail(str(exc), tok)
            else:
                self.fail(f"unexpected {self.tok.text!r} in run block")
            self.accept(";")

    # -- coordination terms ------------------------------------------------------------

    def term(self, scope: _Scope):
        items = [self.term_and(scope)]
        while self.accept("|"):
            items.append(self.term_and(scope))
        return items[0] if len(items) == 1 else OrC(tuple(items))

    def term_and(self, scope: _Scope):
        items = [self.term_atom(scope)]
        while self.accept("&"):
            items.append(self.term_atom(scope))
        return items[0] if len(items) == 1 else AndC(tuple(items))

    def _try(self, fn, *args):
        """Run ``fn``; on a parse error or a non-term continuation rewind and return ``None``."""
        save = self.i
        try:
            out = fn(*args)
        except ParseError:
            self.i = save
            return None
        if not (self.at(*TERM_END) or self.tok.kind == "eof"):
            self.i = save
            return None
        return out

    def _paren(self, inner, scope):
        self.expect("(")
        out = inner(scope)
        self.expect(")")
        return out

    def term_atom(self, scope: _Scope):
        if self.at("["):
            decls, inner = self.decls(scope)
            if self.tok.kind == "ident" and self.peek().text == "." and self.peek(2).kind == "ident" and self.peek(3).text == "=>":
                return self.conjunctive(decls, inner)
            if self.at("("):
                body = self._try(self._paren, self.pterm, inner)
                if body is not None:
                    return Quantified(tuple(decls), body)
            return Quantified(tuple(decls), self.rule(inner))
        if self.at("AtMost") and self.peek().text == "(" and self.peek(2).kind == "int" and self.peek(3).text == ")" and self.peek(4).text == "(":
            return self.restriction()
        if self.at("on"):
            return self.macro()
        if self.at("("):
            got = self._try(self._paren, self.term, scope)
            if got is not None:
                return got
        if self.tok.kind == "ident" and self.peek().text == "." and self.peek(3).text == "=>":
            self.fail("a conjunctive term needs a declaration of its port's owner")
        return Lifted(self.rule(scope))

    def decls(self, scope: _Scope) -> tuple[list[Decl], _Scope]:
        self.expect("[")
        out: list[Decl] = []
        while True:
            quant = None
            if self.at("forall", "exists"):
                quant = self.ident()
            names = [self.ident("component variable")]
            while self.accept(","):
                names.append(self.ident("component variable"))
            tok = self.expect(":")
            tname = self.ident("type name")
            if tname not in self.types:
                self.fail(f"unknown component type {tname!r}", tok)
            motif = self.ident("motif name") if self.accept("in") else None
            if motif is not None and motif not in self.maps:
                self.fail(f"unknown motif {motif!r}", tok)
            for n in names:
                out.append(Decl(quant, n, tname, motif))
                scope = scope.bind(n, tname)
            if not self.accept(","):
                break
        self.expect("]")
        return out, scope

    def conjunctive(self, decls: list[Decl], scope: _Scope) -> Conjunctive:
        tok = self.tok
        owner = self.ident()
        self.expect(".")
        pname = self.ident("port")
        if owner not in scope.vars:
            self.fail(f"unbound component variable {owner!r}", tok)
        if pname not in self.types[scope.vars[owner]].ports:
            self.fail(f"{scope.vars[owner]} has no port {pname!r}", tok)
        self.expect("=>")
        guard = self.guard(scope)
        self.expect("->")
        return Conjunctive(tuple(decls), Port(owner, pname), guard, self.ops_block(scope))

    def pterm(self, scope: _Scope):
        items = [self.pterm_and(scope)]
        while self.accept("|"):
            items.append(self.pterm_and(scope))
        return items[0] if len(items) == 1 else OrTerm(tuple(items))

    def pterm_and(self, scope: _Scope):
        items = [self.pterm_atom(scope)]
        while self.accept("&"):
            items.append(self.pterm_atom(scope))
        return items[0] if len(items) == 1 else AndTerm(tuple(items))

    def pterm_atom(self, scope: _Scope):
        if self.at("("):
            got = self._try(self._paren, self.pterm, scope)
            if got is not None:
                return got
        return self.rule(scope)

    def rule(self, scope: _Scope) -> Rule:
        guard = self.guard(scope)
        self.expect("->")
        return Rule(guard, self.ops_block(scope))

    def restriction(self) -> Restriction:
        tok = self.expect("AtMost")
        self.expect("(")
        n = self.integer()
        self.expect(")")
        self.expect("(")
        tname = self.ident("type name")
        port = self.ident("port") if self.accept(".") else None
        self.expect(")")
        if tname not in self.types:
            self.fail(f"unknown component type {tname!r}", tok)
        if port is not None and port not in self.types[tname].ports:
            self.fail(f"{tname} has no port {port!r}", tok)
        return Restriction(n, tname, port)

    def macro(self) -> Macro:
        tok = self.expect("on")
        anchor = self.ident("type name")
        self.expect(".")
        aport = self.ident("port")
        if anchor not in self.types:
            self.fail(f"unknown component type {anchor!r}", tok)
        kind = self.ident("constraint name")
        if kind not in MACRO_NAMES:
            self.fail(f"unknown constraint {kind!r}; expected one of {', '.join(MACRO_NAMES)}")
        k = None
        if kind in ("AtMost", "AtLeast", "Exactly"):
            self.expect("(")
            k = self.integer()
            self.expect(")")
        ports = []
        while True:
            q = self.ident("port")
            self.expect("^")
            ports.append((q, self.ident("index variable")))
            if not self.accept(","):
                break
        self.expect("[")
        bound: dict[str, str] = {}
        while True:
            btok = self.tok
            tname = self.ident("type name")
            self.expect("[")
            idx = self.ident("index variable")
            self.expect("]")
            if tname not in self.types:
                self.fail(f"unknown component type {tname!r}", btok)
            bound[idx] = tname
            if not self.accept(","):
                break
        predicate = None
        if self.accept("|"):
            scope = _Scope({**bound, "self": anchor})
            predicate = self.expr(scope)
        self.expect("]")
        missing = [j for _, j in ports if j not in bound]
        if missing or len(bound) != len(ports):
            self.fail(f"index variables {missing or sorted(bound)} do not match the port list", tok)
        entries = tuple(MacroEntry(q, bound[j], j) for q, j in ports)
        return Macro(kind, anchor, aport, entries, predicate, k)

    # -- operations -----------------------------------------------------------------

    def ops_block(self, scope: _Scope) -> frozenset:
        self.expect("{")
        out = []
        while not self.accept("}"):
            out.append(self.op(scope))
            if not self.at("}"):
                self.expect(";")
        return frozenset(out)

    def op(self, scope: _Scope):
        tok = self.tok
        if self.accept("if"):
            cond = self.expr(scope)
            self.expect("then")
            then = self.ops_block(scope)
            orelse = self.ops_block(scope) if self.accept("else") else frozenset()
            return If(cond, then, orelse)
        name = tok.text if tok.kind == "ident" else None
        if name in ("create", "delete", "addNode", "removeNode", "addEdge", "removeEdge", "move", "migrate") and self.peek().text == "(":
            self.i += 2
            if name == "create":
                tname = self.ident("type name")
                if tname not in self.types:
                    self.fail(f"unknown component type {tname!r}", tok)
                self.expect(",")
                node = self.expr(scope)
                motif = self.motif_arg()
                self.expect(")")
                return Create(tname, node, motif)
            if name == "migrate":
                inst = self.expr(scope)
                self.expect(",")
                motif = self.ident("motif name")
                if motif not in self.maps:
                    self.fail(f"unknown motif {motif!r}", tok)
                self.expect(",")
                node = self.expr(scope)
                self.expect(")")
                return Migrate(inst, motif, node)
            first = self.expr(scope)
            if name == "delete":
                self.expect(")")
                return Delete(first)
            if name in ("addNode", "removeNode"):
                motif = self.motif_arg()
                self.expect(")")
                return (AddNode if name == "addNode" else RemoveNode)(first, motif)
            self.expect(",")
            second = self.expr(scope)
            if name == "move":
                self.expect(")")
                return Move(first, second)
            motif = self.motif_arg()
            self.expect(")")
            return (AddEdge if name == "addEdge" else RemoveEdge)(first, second, motif)
        target = self.postfix(scope)
        if not isinstance(target, (Var, NodeAttr)):
            self.fail("assignment target must be a variable or a node attribute", tok)
        self.expect(":=")
        return Assign(target, self.expr(scope))

    def motif_arg(self) -> str | None:
        if not self.accept(","):
            return None
        tok = self.tok
        m = self.ident("motif name")
        if m not in self.maps:
            self.fail(f"unknown motif {m!r}", tok)
        return m

    # -- guards and expressions ------------------------------------------------------

    def guard(self, scope: _Scope) -> Formula:
        tok = self.tok
        return self.to_formula(self.expr(scope, guard=True), tok)

    def to_formula(self, e: Expr, tok: Token) -> Formula:
        if isinstance(e, BinOp) and e.op in ("and", "or"):
            cls = And if e.op == "and" else Or
            items = []
            for side in (e.left, e.right):
                f = self.to_formula(side, tok)
                items.extend(f.items if isinstance(f, cls) else (f,))
            return cls(tuple(items))
        if isinstance(e, UnOp) and e.op == "not":
            return Not(self.to_formula(e.operand, tok))
        if isinstance(e, Lit) and isinstance(e.value, bool):
            return TRUE if e.value else FALSE
        if isinstance(e, _PortRef):
            return PortLit(e.port)
        if isinstance(e, _IdleRef):
            return Idle(e.instance)
        if _has_ref(e):
            self.fail("port literals may only be combined with and, or, not and implies", tok)
        return Pred(e)

    def expr(self, scope: _Scope, guard: bool = False) -> Expr:
        left = self.e_or(scope, guard)
        if self.accept("implies"):
            return BinOp("or", UnOp("not", left), self.expr(scope, guard))
        return left

    def e_or(self, scope, guard):
        left = self.e_and(scope, guard)
        while self.accept("or"):
            left = BinOp("or", left, self.e_and(scope, guard))
        return left

    def e_and(self, scope, guard):
        left = self.e_not(scope, guard)
        while self.accept("and"):
            left = BinOp("and", left, self.e_not(scope, guard))
        return left

    def e_not(self, scope, guard):
        if self.accept("not"):
            return UnOp("not", self.e_not(scope, guard))
        return self.e_cmp(scope, guard)

    def e_cmp(self, scope, guard):
        tok = self.tok
        left = self.e_add(scope, guard)
        if self.at(*COMPARISONS):
            op = self.ident() if self.at("in") else self.expect(self.tok.text).text
            right = self.e_add(scope, guard)
            if _has_ref(left) or _has_ref(right):
                self.fail("port literals cannot be compared", tok)
            return BinOp(op, left, right)
        return left

    def e_add(self, scope, guard):
        left = self.e_mul(scope, guard)
        while self.at("+", "-", "union"):
            op = self.tok.text
            self.i += 1
            left = BinOp(op, left, self.e_mul(scope, guard))
        return left

    def e_mul(self, scope, guard):
        left = self.e_unary(scope, guard)
        while self.at("*", "mod"):
            op = self.tok.text
            self.i += 1
            left = BinOp(op, left, self.e_unary(scope, guard))
        return left

    def e_unary(self, scope, guard):
        if self.at("-"):
            if self.peek().kind == "int":
                self.i += 1
                v = -int(self.tok.text)
                self.i += 1
                return Lit(v)
            self.i += 1
            return UnOp("-", self.e_unary(scope, guard))
        return self.postfix(scope, guard)

    def postfix(self, scope, guard=False):
        e = self.primary(scope, guard)
        while self.at(".") and self.peek().kind == "ident" and isinstance(e, (Addr, VecLit, Lit, NodeAttr)):
            self.i += 1
            e = NodeAttr(e, self.ident())
        return e

    def primary(self, scope: _Scope, guard: bool) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            return Lit(int(tok.text))
        if self.accept("("):
            first = self.expr(scope, guard)
            if self.accept(","):
                items = [first, self.expr(scope, guard)]
                while self.accept(","):
                    items.append(self.expr(scope, guard))
                self.expect(")")
                return VecLit(tuple(items))
            self.expect(")")
            return first
        if self.accept("{"):
            items = []
            if not self.at("}"):
                items.append(self.expr(scope))
                while self.accept(","):
                    items.append(self.expr(scope))
            self.expect("}")
            return SetLit(tuple(items))
        if tok.kind != "ident":
            self.fail(f"expected an expression, found {tok.text or 'end of input'!r}")
        name = tok.text
        if name in ("true", "false"):
            self.i += 1
            return Lit(name == "true")
        if name in ("at", "card", "distance", "idle") and self.peek().text == "(":
            self.i += 2
            if name == "at":
                v = self.component(scope)
                self.expect(")")
                return Addr(Inst(v))
            if name == "idle":
                if not guard:
                    self.fail("idle() is only allowed in guards", tok)
                v = self.component(scope)
                self.expect(")")
                return _IdleRef(v)
            if name == "card":
                arg = self.expr(scope)
                self.expect(")")
                return UnOp("card", arg)
            a = self.expr(scope)
            self.expect(",")
            b = self.expr(scope)
            self.expect(")")
            return Call("distance", (a, b))
        self.i += 1
        if name in scope.vars:
            if self.at(".") and self.peek().kind == "ident":
                self.i += 1
                member_tok = self.tok
                member = self.ident()
                ctype = self.types[scope.vars[name]]
                if member in ctype.ports:
                    if not guard:
                        self.fail(f"port {name}.{member} used outside a guard", member_tok)
                    return _PortRef(Port(name, member))
                if ctype.has_var(member):
                    return Var(Inst(name), member)
                self.fail(f"{ctype.name} has no port or variable {member!r}", member_tok)
            return Inst(name)
        if scope.owner is not None and self.types[scope.owner].has_var(name):
            return Var(Inst("self"), name)
        if scope.owner is not None and name in self.types[scope.owner].ports:
            self.fail(f"port {name!r} cannot be used in an expression", tok)
        if self.at("."):
            self.fail(f"unbound component variable {name!r}", tok)
        self.fail(f"unknown name {name!r}", tok)

    def component(self, scope: _Scope) -> str:
        tok = self.tok
        v = self.ident("component variable")
        if v not in scope.vars:
            self.fail(f"unbound component variable {v!r}", tok)
        return v

    # -- assembly ---------------------------------------------------------------------

    def build(self) -> System:
        diags: list[Diagnostic] = []
        for name, term in self.terms.items():
            t = self.term_pos[name]
            diags += [Diagnostic(t.line, t.col, f"motif {name}: {p}") for p in check_well_formed(term, self.types)]
        if self.migration is not None:
            t = self.migration_pos
            diags += [Diagnostic(t.line, t.col, f"migration: {p}") for p in check_well_formed(self.migration, self.types)]
        if diags:
            raise ParseError(diags)
        insts: dict[str, dict] = {m: {} for m in self.maps}
        addrs: dict[str, dict] = {m: {} for m in self.maps}
        for cid, spec in enumerate(self.instances, start=1):
            try:
                inst = instantiate(self.types[spec.type], cid, overrides=spec.values)
                if spec.node is not None:
                    node = self.maps[spec.motif].normalize(spec.node)
                    addrs[spec.motif][cid] = node
            except DreamError as exc:
                diags.append(Diagnostic(spec.token.line, spec.token.col, str(exc)))
                continue
            insts[spec.motif][cid] = inst
        if diags:
            raise ParseError(diags)
        try:
            cfg = Configuration(dict(self.types), {m: MotifState(insts[m], self.maps[m], addrs[m]) for m in self.maps},
                                len(self.instances) + 1)
            motifs = {m: Motif(m, self.terms[m]) for m in self.maps}
            return System(dict(self.types), motifs, cfg, self.migration, tuple(self.metrics), self.steps, self.seed, name=self.name)
        except DreamError as exc:
            problems = getattr(exc, "problems", [str(exc)])
            t = self.toks[-1]
            raise ParseError([Diagnostic(t.line, t.col, p) for p in problems]) from None


def _has_ref(e: Any) -> bool:
    if isinstance(e, (_PortRef, _IdleRef)):
        return True
    if isinstance(e, BinOp):
        return _has_ref(e.left) or _has_ref(e.right)
    if isinstance(e, UnOp):
        return _has_ref(e.operand)
    if isinstance(e, (SetLit, VecLit)):
        return any(_has_ref(x) for x in e.items)
    if isinstance(e, Call):
        return any(_has_ref(x) for x in e.args)
    return False


def parse(text: str) -> System:
    """Parse a scenario; raises ``ParseError`` carrying positioned diagnostics."""
    return Parser(text).parse()


def check(text: str) -> list[Diagnostic]:
    """Diagnostics for ``text``; empty when it describes a well-formed system."""
    try:
        parse(text)
    except ParseError as exc:
        return exc.diagnostics
    return []
