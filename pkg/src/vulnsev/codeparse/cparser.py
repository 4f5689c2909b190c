"""Recursive-descent parser for a C/C++ function-snippet subset.

Produces a typed tree of named nodes only: punctuation and keyword
terminals never appear as nodes, so a pre-order walk of node kinds is
already the shortened serialization the syntactic similarity consumes.

Two language modes share the grammar: ``"c"`` and ``"cpp"``. C++ mode
additionally accepts scope-resolved names, reference declarators,
``class`` specifiers, ``namespace`` blocks, ``new``/``delete`` and
``try``/``catch``/``throw``. Constructs outside the subset (templates,
operator overloads, K&R definitions, GNU statement expressions) raise
:class:`ParseFailure`, which callers treat as "drop this record".

Any lexical or syntactic mismatch anywhere in the input fails the whole
parse; there are no error-recovery nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, NamedTuple, Optional, Tuple

from ..errors import ParseFailure

LANGUAGES = ("c", "cpp")


@dataclass(frozen=True, slots=True)
class Node:
    """A named syntax-tree node. Leaves carry their source text."""

    kind: str
    children: Tuple["Node", ...] = ()
    text: str = ""

    def preorder_kinds(self) -> Iterator[str]:
        yield self.kind
        for child in self.children:
            yield from child.preorder_kinds()

    def walk(self) -> Iterator["Node"]:
        yield self
        for child in self.children:
            yield from child.walk()


class Token(NamedTuple):
    kind: str  # id | num | str | char | punct | directive | eof
    text: str
    line: int
    col: int


_PUNCTS = [
    "<<=", ">>=", "...", "::", "->", "<<", ">>", "<=", ">=", "==", "!=",
    "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "##", "+", "-", "*", "/", "%", "=", "<", ">", "!", "~", "&", "|", "^",
    "?", ":", ";", ",", ".", "(", ")", "[", "]", "{", "}", "#",
]

_PRIMITIVES = {
    "void", "char", "short", "int", "long", "float", "double",
    "signed", "unsigned", "bool", "_Bool",
}
_STORAGE = {"typedef", "extern", "static", "auto", "register", "inline"}
_QUALIFIERS = {"const", "volatile", "restrict"}
_STRUCTISH = {"struct", "union", "enum"}
_STATEMENT_KEYWORDS = {
    "if", "else", "while", "do", "for", "switch", "case", "default",
    "return", "break", "continue", "goto", "sizeof",
}
_CPP_ONLY = {
    "class", "namespace", "new", "delete", "try", "catch", "throw",
    "true", "false", "nullptr", "public", "private", "protected", "this",
}

_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^="}

_BINARY_PRECEDENCE = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6, "<": 7, ">": 7, "<=": 7, ">=": 7,
    "<<": 8, ">>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}


class _ParseError(Exception):
    def __init__(self, token: Token, message: str):
        super().__init__(f"line {token.line}:{token.col}: {message}")
        self.token = token


def _tokenize(code: str) -> List[Token]:
    tokens: List[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(code)
    at_line_start = True

    def error(message: str) -> _ParseError:
        return _ParseError(Token("eof", "", line, col), message)

    while i < n:
        ch = code[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            at_line_start = True
            continue
        if ch in " \t\r\f\v":
            i += 1
            col += 1
            continue
        if code.startswith("//", i):
            while i < n and code[i] != "\n":
                i += 1
            continue
        if code.startswith("/*", i):
            end = code.find("*/", i + 2)
            if end < 0:
                raise error("unterminated block comment")
            for j in range(i, end + 2):
                if code[j] == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
            i = end + 2
            continue
        if ch == "#" and at_line_start:
            start_line, start_col = line, col
            start = i
            while i < n:
                if code[i] == "\n":
                    if code[i - 1] == "\\":
                        line += 1
                        col = 1
                        i += 1
                        continue
                    break
                i += 1
                col += 1
            tokens.append(Token("directive", code[start:i].rstrip(), start_line, start_col))
            continue
        at_line_start = False
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (code[i].isalnum() or code[i] == "_"):
                i += 1
            text = code[start:i]
            tokens.append(Token("id", text, line, col))
            col += i - start
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and code[i + 1].isdigit()):
            start = i
            if code.startswith(("0x", "0X"), i):
                i += 2
                while i < n and (code[i] in "0123456789abcdefABCDEF"):
                    i += 1
            else:
                while i < n and (code[i].isdigit() or code[i] == "."):
                    i += 1
                if i < n and code[i] in "eE":
                    j = i + 1
                    if j < n and code[j] in "+-":
                        j += 1
                    if j < n and code[j].isdigit():
                        i = j
                        while i < n and code[i].isdigit():
                            i += 1
            while i < n and code[i] in "uUlLfF":
                i += 1
            text = code[start:i]
            tokens.append(Token("num", text, line, col))
            col += i - start
            continue
        if ch in "\"'":
            quote = ch
            start = i
            start_line, start_col = line, col
            i += 1
            col += 1
            while i < n:
                if code[i] == "\\" and i + 1 < n:
                    i += 2
                    col += 2
                    continue
                if code[i] == quote:
                    i += 1
                    col += 1
                    break
                if code[i] == "\n":
                    raise error("unterminated literal")
                i += 1
                col += 1
            else:
                raise error("unterminated literal")
            kind = "str" if quote == '"' else "char"
            tokens.append(Token(kind, code[start:i], start_line, start_col))
            continue
        for punct in _PUNCTS:
            if code.startswith(punct, i):
                tokens.append(Token("punct", punct, line, col))
                i += len(punct)
                col += len(punct)
                break
        else:
            raise error(f"unexpected character {ch!r}")
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: List[Token], language: str):
        self.tokens = tokens
        self.pos = 0
        self.cpp = language == "cpp"

    # -- token helpers -------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def at(self, text: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.text == text and tok.kind in ("punct", "id")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            raise _ParseError(tok, f"expected {text!r}, found {tok.text!r}")
        self.pos += 1
        return tok

    def advance(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def fail(self, message: str) -> _ParseError:
        return _ParseError(self.peek(), message)

    # -- keyword classification -----------------------------------------

    def _is_keyword(self, text: str) -> bool:
        if text in _PRIMITIVES or text in _STORAGE or text in _QUALIFIERS:
            return True
        if text in _STRUCTISH or text in _STATEMENT_KEYWORDS:
            return True
        return self.cpp and text in _CPP_ONLY

    def _is_type_word(self, text: str) -> bool:
        return text in _PRIMITIVES or (
            text.endswith("_t") and len(text) > 2 and not self._is_keyword(text)
        )

    def _identifier_token(self, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind == "id" and not self._is_keyword(tok.text)

    # -- entry ----------------------------------------------------------

    def parse_translation_unit(self) -> Node:
        items: List[Node] = []
        while self.peek().kind != "eof":
            items.append(self.parse_top_level_item())
        if not items:
            raise self.fail("empty input")
        return Node("translation_unit", tuple(items))

    def parse_top_level_item(self) -> Node:
        tok = self.peek()
        if tok.kind == "directive":
            self.advance()
            return Node("preproc_directive", text=tok.text)
        if self.cpp and self.at("namespace"):
            return self.parse_namespace()
        return self.parse_declaration_or_definition()

    def parse_namespace(self) -> Node:
        self.expect("namespace")
        children: List[Node] = []
        if self._identifier_token():
            children.append(Node("identifier", text=self.advance().text))
        self.expect("{")
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise self.fail("unterminated namespace body")
            children.append(self.parse_top_level_item())
        self.expect("}")
        return Node("namespace_definition", tuple(children))

    # -- declarations ------------------------------------------------------

    def parse_declaration_or_definition(self) -> Node:
        specifiers = self.parse_declaration_specifiers()
        if self.accept(";"):
            return Node("declaration", tuple(specifiers))
        declarator = self.parse_declarator()
        if self.at("{") and _contains_function_declarator(declarator):
            body = self.parse_compound_statement()
            return Node("function_definition", tuple(specifiers + [declarator, body]))
        return self.parse_declaration_tail(specifiers, declarator)

    def parse_declaration_tail(
        self, specifiers: List[Node], first: Node
    ) -> Node:
        children = list(specifiers)
        children.append(self.parse_init_declarator(first))
        while self.accept(","):
            children.append(self.parse_init_declarator(self.parse_declarator()))
        self.expect(";")
        return Node("declaration", tuple(children))

    def parse_init_declarator(self, declarator: Node) -> Node:
        if self.accept(":"):
            width = self.parse_conditional()
            declarator = Node("bitfield_clause", (declarator, width))
        if self.accept("="):
            value = self.parse_initializer()
            return Node("init_declarator", (declarator, value))
        return declarator

    def parse_declaration_specifiers(self) -> List[Node]:
        specifiers: List[Node] = []
        saw_type = False
        while True:
            tok = self.peek()
            if tok.kind != "id":
                break
            text = tok.text
            if text in _STORAGE:
                self.advance()
                specifiers.append(Node("storage_class_specifier", text=text))
                continue
            if text in _QUALIFIERS:
                self.advance()
                specifiers.append(Node("type_qualifier", text=text))
                continue
            if text in _PRIMITIVES and not saw_type:
                words = [self.advance().text]
                while self.peek().kind == "id" and self.peek().text in _PRIMITIVES:
                    words.append(self.advance().text)
                kind = "sized_type_specifier" if len(words) > 1 else "primitive_type"
                specifiers.append(Node(kind, text=" ".join(words)))
                saw_type = True
                continue
            if text in _STRUCTISH and not saw_type:
                specifiers.append(self.parse_struct_or_enum(text))
                saw_type = True
                continue
            if self.cpp and text == "class" and not saw_type:
                specifiers.append(self.parse_struct_or_enum("class"))
                saw_type = True
                continue
            if not saw_type and self._identifier_token() and self._looks_like_type_name():
                specifiers.append(self.parse_type_name())
                saw_type = True
                continue
            break
        if not saw_type:
            raise self.fail("expected a type specifier")
        return specifiers

    def _looks_like_type_name(self) -> bool:
        """Heuristic: identifier acts as a type when a declarator follows."""
        if self._is_type_word(self.peek().text):
            return True
        offset = 1
        if self.cpp:
            while self.at("::", offset) and self._identifier_token(offset + 1):
                offset += 2
        follower = self.peek(offset)
        if follower.kind == "id" and not self._is_keyword(follower.text):
            return True
        if follower.text == "*" or (self.cpp and follower.text == "&"):
            return self.peek(offset + 1).kind == "id"
        return False

    def parse_type_name(self) -> Node:
        parts = [self.advance().text]
        if self.cpp:
            while self.at("::") and self._identifier_token(1):
                self.advance()
                parts.append(self.advance().text)
        if len(parts) > 1:
            return Node("scoped_type_identifier", text="::".join(parts))
        return Node("type_identifier", text=parts[0])

    def parse_struct_or_enum(self, keyword: str) -> Node:
        self.expect(keyword)
        kind = {
            "struct": "struct_specifier",
            "union": "union_specifier",
            "enum": "enum_specifier",
            "class": "class_specifier",
        }[keyword]
        children: List[Node] = []
        if self._identifier_token():
            children.append(Node("type_identifier", text=self.advance().text))
        if self.at("{"):
            if keyword == "enum":
                children.append(self.parse_enumerator_list())
            else:
                children.append(self.parse_field_list())
        elif not children:
            raise self.fail(f"{keyword} needs a tag name or a body")
        return Node(kind, tuple(children))

    def parse_enumerator_list(self) -> Node:
        self.expect("{")
        enumerators: List[Node] = []
        while not self.at("}"):
            if not self._identifier_token():
                raise self.fail("expected enumerator name")
            name = Node("identifier", text=self.advance().text)
            if self.accept("="):
                value = self.parse_conditional()
                enumerators.append(Node("enumerator", (name, value)))
            else:
                enumerators.append(Node("enumerator", (name,)))
            if not self.accept(","):
                break
        self.expect("}")
        return Node("enumerator_list", tuple(enumerators))

    def parse_field_list(self) -> Node:
        self.expect("{")
        fields: List[Node] = []
        while not self.at("}"):
            tok = self.peek()
            if tok.kind == "eof":
                raise self.fail("unterminated field list")
            if tok.kind == "directive":
                self.advance()
                fields.append(Node("preproc_directive", text=tok.text))
                continue
            if self.cpp and tok.text in ("public", "private", "protected"):
                self.advance()
                self.expect(":")
                fields.append(Node("access_specifier", text=tok.text))
                continue
            fields.append(self.parse_declaration_or_definition())
        self.expect("}")
        return Node("field_declaration_list", tuple(fields))

    # -- declarators ---------------------------------------------------------

    def parse_declarator(self, abstract: bool = False) -> Node:
        if self.accept("*"):
            quals = []
            while self.peek().kind == "id" and self.peek().text in _QUALIFIERS:
                quals.append(Node("type_qualifier", text=self.advance().text))
            inner = self.parse_declarator(abstract)
            if inner.kind == "abstract_hole":
                return Node("abstract_pointer_declarator", tuple(quals))
            return Node("pointer_declarator", tuple(quals) + (inner,))
        if self.cpp and self.accept("&"):
            inner = self.parse_declarator(abstract)
            if inner.kind == "abstract_hole":
                return Node("abstract_reference_declarator")
            return Node("reference_declarator", (inner,))
        return self.parse_direct_declarator(abstract)

    def parse_direct_declarator(self, abstract: bool) -> Node:
        base: Optional[Node] = None
        if self.at("(") and self.peek(1).text == "*":
            self.expect("(")
            inner = self.parse_declarator(abstract)
            self.expect(")")
            base = Node("parenthesized_declarator", (inner,))
        elif self._identifier_token():
            parts = [self.advance().text]
            if self.cpp:
                while self.at("::") and self._identifier_token(1):
                    self.advance()
                    parts.append(self.advance().text)
            if len(parts) > 1:
                base = Node("scoped_identifier", text="::".join(parts))
            else:
                base = Node("identifier", text=parts[0])
        elif abstract:
            base = Node("abstract_hole")
        else:
            raise self.fail("expected a declarator name")
        while True:
            if self.at("["):
                self.advance()
                if self.at("]"):
                    self.advance()
                    base = Node("array_declarator", (base,))
                else:
                    size = self.parse_conditional()
                    self.expect("]")
                    base = Node("array_declarator", (base, size))
                continue
            if self.at("("):
                params = self.parse_parameter_list()
                base = Node("function_declarator", (base, params))
                continue
            break
        return base

    def parse_parameter_list(self) -> Node:
        self.expect("(")
        params: List[Node] = []
        if not self.at(")"):
            while True:
                if self.at("..."):
                    self.advance()
                    params.append(Node("variadic_parameter"))
                else:
                    params.append(self.parse_parameter_declaration())
                if not self.accept(","):
                    break
        self.expect(")")
        return Node("parameter_list", tuple(params))

    def parse_parameter_declaration(self) -> Node:
        specifiers = self.parse_declaration_specifiers()
        children = list(specifiers)
        tok = self.peek()
        if tok.text in ("*", "&", "(") or self._identifier_token():
            declarator = self.parse_declarator(abstract=True)
            if declarator.kind != "abstract_hole":
                children.append(declarator)
        return Node("parameter_declaration", tuple(children))

    # -- statements ------------------------------------------------------

    def parse_compound_statement(self) -> Node:
        self.expect("{")
        statements: List[Node] = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise self.fail("unterminated block")
            statements.append(self.parse_statement())
        self.expect("}")
        return Node("compound_statement", tuple(statements))

    def parse_statement(self) -> Node:
        tok = self.peek()
        if tok.kind == "directive":
            self.advance()
            return Node("preproc_directive", text=tok.text)
        if self.at("{"):
            return self.parse_compound_statement()
        if self.at(";"):
            self.advance()
            return Node("expression_statement")
        if tok.kind == "id":
            handler = {
                "if": self.parse_if,
                "while": self.parse_while,
                "do": self.parse_do,
                "for": self.parse_for,
                "switch": self.parse_switch,
                "case": self.parse_case,
                "default": self.parse_case,
                "return": self.parse_return,
                "break": lambda: self.parse_jump("break", "break_statement"),
                "continue": lambda: self.parse_jump("continue", "continue_statement"),
                "goto": self.parse_goto,
            }.get(tok.text)
            if handler is not None:
                return handler()
            if self.cpp and tok.text == "try":
                return self.parse_try()
            if self.cpp and tok.text == "throw":
                return self.parse_throw()
        if (
            self._identifier_token()
            and self.peek(1).text == ":"
            and self.peek(2).text != ":"
        ):
            label = Node("statement_identifier", text=self.advance().text)
            self.expect(":")
            return Node("labeled_statement", (label, self.parse_statement()))
        if self._starts_declaration():
            return self.parse_declaration_or_definition()
        expr = self.parse_expression()
        self.expect(";")
        return Node("expression_statement", (expr,))

    def _starts_declaration(self) -> bool:
        tok = self.peek()
        if tok.kind != "id":
            return False
        text = tok.text
        if text in _STORAGE or text in _QUALIFIERS or text in _PRIMITIVES:
            return True
        if text in _STRUCTISH or (self.cpp and text == "class"):
            return True
        if not self._identifier_token():
            return False
        return self._looks_like_type_name()

    def parse_if(self) -> Node:
        self.expect("if")
        self.expect("(")
        condition = self.parse_expression()
        self.expect(")")
        children = [Node("parenthesized_expression", (condition,)), self.parse_statement()]
        if self.accept("else"):
            children.append(Node("else_clause", (self.parse_statement(),)))
        return Node("if_statement", tuple(children))

    def parse_while(self) -> Node:
        self.expect("while")
        self.expect("(")
        condition = self.parse_expression()
        self.expect(")")
        return Node(
            "while_statement",
            (Node("parenthesized_expression", (condition,)), self.parse_statement()),
        )

    def parse_do(self) -> Node:
        self.expect("do")
        body = self.parse_statement()
        self.expect("while")
        self.expect("(")
        condition = self.parse_expression()
        self.expect(")")
        self.expect(";")
        return Node("do_statement", (body, Node("parenthesized_expression", (condition,))))

    def parse_for(self) -> Node:
        self.expect("for")
        self.expect("(")
        children: List[Node] = []
        if self.at(";"):
            self.advance()
        elif self._starts_declaration():
            children.append(self.parse_declaration_or_definition())
        else:
            children.append(self.parse_expression())
            self.expect(";")
        if not self.at(";"):
            children.append(self.parse_expression())
        self.expect(";")
        if not self.at(")"):
            children.append(self.parse_expression())
        self.expect(")")
        children.append(self.parse_statement())
        return Node("for_statement", tuple(children))

    def parse_switch(self) -> Node:
        self.expect("switch")
        self.expect("(")
        value = self.parse_expression()
        self.expect(")")
        return Node(
            "switch_statement",
            (Node("parenthesized_expression", (value,)), self.parse_statement()),
        )

    def parse_case(self) -> Node:
        if self.accept("case"):
            value = self.parse_conditional()
            self.expect(":")
            return Node("case_statement", (value,))
        self.expect("default")
        self.expect(":")
        return Node("case_statement")

    def parse_return(self) -> Node:
        self.expect("return")
        if self.at(";"):
            self.advance()
            return Node("return_statement")
        value = self.parse_expression()
        self.expect(";")
        return Node("return_statement", (value,))

    def parse_jump(self, keyword: str, kind: str) -> Node:
        self.expect(keyword)
        self.expect(";")
        return Node(kind)

    def parse_goto(self) -> Node:
        self.expect("goto")
        if not self._identifier_token():
            raise self.fail("expected a label after goto")
        label = Node("statement_identifier", text=self.advance().text)
        self.expect(";")
        return Node("goto_statement", (label,))

    def parse_try(self) -> Node:
        self.expect("try")
        children: List[Node] = [self.parse_compound_statement()]
        if not self.at("catch"):
            raise self.fail("try block without catch clause")
        while self.at("catch"):
            self.advance()
            self.expect("(")
            if self.at("..."):
                self.advance()
                param: Node = Node("variadic_parameter")
            else:
                param = self.parse_parameter_declaration()
            self.expect(")")
            body = self.parse_compound_statement()
            children.append(Node("catch_clause", (param, body)))
        return Node("try_statement", tuple(children))

    def parse_throw(self) -> Node:
        self.expect("throw")
        if self.at(";"):
            self.advance()
            return Node("throw_statement")
        value = self.parse_expression()
        self.expect(";")
        return Node("throw_statement", (value,))

    # -- expressions ------------------------------------------------------

    def parse_expression(self) -> Node:
        first = self.parse_assignment()
        if not self.at(","):
            return first
        items = [first]
        while self.accept(","):
            items.append(self.parse_assignment())
        return Node("comma_expression", tuple(items))

    def parse_assignment(self) -> Node:
        left = self.parse_conditional()
        tok = self.peek()
        if tok.kind == "punct" and tok.text in _ASSIGN_OPS:
            self.advance()
            right = self.parse_assignment()
            return Node("assignment_expression", (left, right))
        return left

    def parse_conditional(self) -> Node:
        condition = self.parse_binary(1)
        if not self.accept("?"):
            return condition
        consequence = self.parse_expression()
        self.expect(":")
        alternative = self.parse_conditional()
        return Node("conditional_expression", (condition, consequence, alternative))

    def parse_binary(self, min_precedence: int) -> Node:
        left = self.parse_cast_or_unary()
        while True:
            tok = self.peek()
            if tok.kind != "punct":
                return left
            precedence = _BINARY_PRECEDENCE.get(tok.text, 0)
            if precedence < min_precedence:
                return left
            self.advance()
            right = self.parse_binary(precedence + 1)
            left = Node("binary_expression", (left, right))

    def parse_cast_or_unary(self) -> Node:
        if self.at("(") and self._type_starts_at(1):
            self.expect("(")
            type_node = self.parse_type_descriptor()
            self.expect(")")
            return Node("cast_expression", (type_node, self.parse_cast_or_unary()))
        return self.parse_unary()

    def _type_starts_at(self, offset: int) -> bool:
        tok = self.peek(offset)
        if tok.kind != "id":
            return False
        return (
            tok.text in _PRIMITIVES
            or tok.text in _QUALIFIERS
            or tok.text in _STRUCTISH
            or (self.cpp and tok.text == "class")
            or self._is_type_word(tok.text)
        )

    def parse_type_descriptor(self) -> Node:
        specifiers = self.parse_declaration_specifiers()
        children = list(specifiers)
        while self.accept("*"):
            children.append(Node("abstract_pointer_declarator"))
        if self.cpp and self.accept("&"):
            children.append(Node("abstract_reference_declarator"))
        return Node("type_descriptor", tuple(children))

    def parse_unary(self) -> Node:
        tok = self.peek()
        if tok.kind == "punct":
            if tok.text in ("!", "~", "+", "-"):
                self.advance()
                return Node("unary_expression", (self.parse_cast_or_unary(),))
            if tok.text in ("*", "&"):
                self.advance()
                return Node("pointer_expression", (self.parse_cast_or_unary(),))
            if tok.text in ("++", "--"):
                self.advance()
                return Node("update_expression", (self.parse_cast_or_unary(),))
        if tok.kind == "id":
            if tok.text == "sizeof":
                return self.parse_sizeof()
            if self.cpp and tok.text == "new":
                return self.parse_new()
            if self.cpp and tok.text == "delete":
                self.advance()
                if self.at("[") and self.peek(1).text == "]":
                    self.advance()
                    self.advance()
                return Node("delete_expression", (self.parse_cast_or_unary(),))
        return self.parse_postfix()

    def parse_sizeof(self) -> Node:
        self.expect("sizeof")
        if self.at("(") and self._type_starts_at(1):
            self.expect("(")
            type_node = self.parse_type_descriptor()
            self.expect(")")
            return Node("sizeof_expression", (type_node,))
        return Node("sizeof_expression", (self.parse_unary(),))

    def parse_new(self) -> Node:
        self.expect("new")
        type_node = self.parse_type_descriptor()
        children: List[Node] = [type_node]
        if self.at("("):
            children.append(self.parse_argument_list())
        elif self.accept("["):
            children.append(self.parse_expression())
            self.expect("]")
        return Node("new_expression", tuple(children))

    def parse_postfix(self) -> Node:
        node = self.parse_primary()
        while True:
            if self.at("("):
                node = Node("call_expression", (node, self.parse_argument_list()))
                continue
            if self.at("["):
                self.advance()
                index = self.parse_expression()
                self.expect("]")
                node = Node("subscript_expression", (node, index))
                continue
            if self.at(".") or self.at("->"):
                self.advance()
                if not self._identifier_token():
                    raise self.fail("expected a field name")
                field_node = Node("field_identifier", text=self.advance().text)
                node = Node("field_expression", (node, field_node))
                continue
            if self.at("++") or self.at("--"):
                self.advance()
                node = Node("update_expression", (node,))
                continue
            return node

    def parse_argument_list(self) -> Node:
        self.expect("(")
        arguments: List[Node] = []
        if not self.at(")"):
            while True:
                arguments.append(self.parse_assignment())
                if not self.accept(","):
                    break
        self.expect(")")
        return Node("argument_list", tuple(arguments))

    def parse_primary(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Node("number_literal", text=tok.text)
        if tok.kind == "str":
            self.advance()
            parts = [Node("string_literal", text=tok.text)]
            while self.peek().kind == "str":
                parts.append(Node("string_literal", text=self.advance().text))
            if len(parts) > 1:
                return Node("concatenated_string", tuple(parts))
            return parts[0]
        if tok.kind == "char":
            self.advance()
            return Node("char_literal", text=tok.text)
        if tok.kind == "id":
            if self.cpp and tok.text in ("true", "false"):
                self.advance()
                return Node("boolean_literal", text=tok.text)
            if self.cpp and tok.text == "nullptr":
                self.advance()
                return Node("null_literal", text=tok.text)
            if self.cpp and tok.text == "this":
                self.advance()
                return Node("this_expression", text=tok.text)
            if self._identifier_token():
                parts = [self.advance().text]
                if self.cpp:
                    while self.at("::") and self._identifier_token(1):
                        self.advance()
                        parts.append(self.advance().text)
                if len(parts) > 1:
                    return Node("scoped_identifier", text="::".join(parts))
                return Node("identifier", text=parts[0])
        if self.at("("):
            self.advance()
            inner = self.parse_expression()
            self.expect(")")
            return Node("parenthesized_expression", (inner,))
        raise self.fail(f"unexpected token {tok.text!r}")

    def parse_initializer(self) -> Node:
        if not self.at("{"):
            return self.parse_assignment()
        self.expect("{")
        items: List[Node] = []
        while not self.at("}"):
            if self.at(".") and self._identifier_token(1):
                self.advance()
                designator = Node("field_designator", text=self.advance().text)
                self.expect("=")
                items.append(Node("initializer_pair", (designator, self.parse_initializer())))
            elif self.at("["):
                self.advance()
                index = self.parse_conditional()
                self.expect("]")
                self.expect("=")
                items.append(
                    Node(
                        "initializer_pair",
                        (Node("subscript_designator", (index,)), self.parse_initializer()),
                    )
                )
            else:
                items.append(self.parse_initializer())
            if not self.accept(","):
                break
        self.expect("}")
        return Node("initializer_list", tuple(items))


def _contains_function_declarator(declarator: Node) -> bool:
    if declarator.kind == "function_declarator":
        return True
    return any(_contains_function_declarator(child) for child in declarator.children)


def parse_source(code: str, language: str = "c") -> Node:
    """Parse a snippet into a typed tree; raise :class:`ParseFailure` on error."""
    if language not in LANGUAGES:
        raise ParseFailure(f"unknown language {language!r}; expected one of {LANGUAGES}")
    try:
        tokens = _tokenize(code)
        parser = _Parser(tokens, language)
        tree = parser.parse_translation_unit()
        trailing = parser.peek()
        if trailing.kind != "eof":
            raise _ParseError(trailing, f"unexpected trailing input {trailing.text!r}")
        return tree
    except _ParseError as exc:
        raise ParseFailure(str(exc)) from None
    except RecursionError:
        raise ParseFailure("nesting too deep to parse") from None
