//! Java feature extraction on top of the tree-sitter Java grammar.

use std::collections::{BTreeSet, HashSet};

use tree_sitter::{Node, Parser, Tree};

use super::{ExtractError, FeatureExtractor, LineFeatures, NodeType};

/// Statement kinds a faulty line can resolve to.
const STATEMENT_KINDS: &[&str] = &[
    "assert_statement",
    "break_statement",
    "continue_statement",
    "do_statement",
    "enhanced_for_statement",
    "explicit_constructor_invocation",
    "expression_statement",
    "field_declaration",
    "for_statement",
    "if_statement",
    "local_variable_declaration",
    "return_statement",
    "switch_expression",
    "synchronized_statement",
    "throw_statement",
    "try_statement",
    "try_with_resources_statement",
    "while_statement",
    "yield_statement",
];

/// Kinds whose subtree is not part of the enclosing statement's own features.
const NESTED_BODY_KINDS: &[&str] = &[
    "block",
    "class_body",
    "switch_block",
    "catch_clause",
    "finally_clause",
    "labeled_statement",
    "constructor_body",
];

/// Type syntax never contributes node types.
const TYPE_KINDS: &[&str] = &[
    "annotated_type",
    "array_type",
    "boolean_type",
    "floating_point_type",
    "generic_type",
    "integral_type",
    "scoped_type_identifier",
    "type_arguments",
    "type_identifier",
    "void_type",
    "dimensions",
    "modifiers",
    "annotation",
    "marker_annotation",
];

const LITERAL_KINDS: &[&str] = &[
    "binary_integer_literal",
    "character_literal",
    "decimal_floating_point_literal",
    "decimal_integer_literal",
    "false",
    "hex_floating_point_literal",
    "hex_integer_literal",
    "null_literal",
    "octal_integer_literal",
    "string_literal",
    "true",
    "class_literal",
];

const COMMENT_KINDS: &[&str] = &["line_comment", "block_comment"];

/// Accessors whose leading argument is an index.
const INDEXED_ACCESSORS: &[&str] = &[
    "get",
    "set",
    "remove",
    "charAt",
    "codePointAt",
    "subList",
    "substring",
    "elementAt",
];

/// Where a statement sits in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementSpan {
    /// 1-based, inclusive.
    pub start_line: u32,
    /// 1-based, inclusive.
    pub end_line: u32,
    pub start_byte: usize,
    pub end_byte: usize,
    /// Raw grammar kind, e.g. `return_statement`.
    pub kind: String,
}

/// Extracts line features from Java sources.
#[derive(Debug, Default, Clone, Copy)]
pub struct JavaExtractor;

impl JavaExtractor {
    pub fn new() -> Self {
        Self
    }

    /// The innermost statement covering `line_id`; when several disjoint
    /// statements share the line, the first one.
    pub fn locate_statement(&self, source: &str, line_id: u32) -> Result<StatementSpan, ExtractError> {
        let unit = ParsedUnit::parse(source)?;
        let node = unit.statement_at(line_id)?;
        Ok(span_of(node))
    }

    pub fn extract_line_features(&self, source: &str, line_id: u32) -> Result<LineFeatures, ExtractError> {
        let unit = ParsedUnit::parse(source)?;
        unit.line_features(line_id)
    }
}

impl FeatureExtractor for JavaExtractor {
    fn extract_lines(
        &self,
        source: &str,
        lines: &[u32],
    ) -> Result<Vec<Result<LineFeatures, ExtractError>>, ExtractError> {
        let unit = ParsedUnit::parse(source)?;
        Ok(lines.iter().map(|&l| unit.line_features(l)).collect())
    }
}

fn span_of(node: Node<'_>) -> StatementSpan {
    StatementSpan {
        start_line: node.start_position().row as u32 + 1,
        end_line: node.end_position().row as u32 + 1,
        start_byte: node.start_byte(),
        end_byte: node.end_byte(),
        kind: node.kind().to_string(),
    }
}

struct ParsedUnit<'s> {
    source: &'s str,
    tree: Tree,
    line_count: u32,
}

impl<'s> ParsedUnit<'s> {
    fn parse(source: &'s str) -> Result<Self, ExtractError> {
        let mut parser = Parser::new();
        parser
            .set_language(&tree_sitter_java::LANGUAGE.into())
            .map_err(|e| ExtractError::Language(e.to_string()))?;
        let tree = parser
            .parse(source, None)
            .ok_or_else(|| ExtractError::Language("parser returned no tree".into()))?;
        let root = tree.root_node();
        if root.has_error() {
            let bad = first_error(root).unwrap_or(root);
            return Err(ExtractError::Parse {
                line: bad.start_position().row as u32 + 1,
                column: bad.start_position().column as u32 + 1,
            });
        }
        let line_count = source.lines().count() as u32;
        Ok(Self {
            source,
            tree,
            line_count,
        })
    }

    fn statement_at(&self, line_id: u32) -> Result<Node<'_>, ExtractError> {
        if line_id == 0 || line_id > self.line_count {
            return Err(ExtractError::LineOutOfRange {
                line: line_id,
                line_count: self.line_count,
            });
        }
        let row = (line_id - 1) as usize;
        let root = self.tree.root_node();
        if !has_substantive_token(root, row) {
            return Err(ExtractError::NoStatementAtLine(line_id));
        }
        let mut candidates = Vec::new();
        collect_covering_statements(root, row, &mut candidates);
        // Keep statements that contain no other candidate, then take the
        // first by position.
        candidates
            .iter()
            .copied()
            .filter(|outer| {
                !candidates
                    .iter()
                    .any(|inner| inner.id() != outer.id() && contains(*outer, *inner))
            })
            .min_by_key(|n| n.start_byte())
            .ok_or(ExtractError::NoStatementAtLine(line_id))
    }

    fn line_features(&self, line_id: u32) -> Result<LineFeatures, ExtractError> {
        let stmt = self.statement_at(line_id)?;
        let scope = Scope::around(stmt, self.source);
        let (bf1, root) = statement_type(stmt);
        let mut bf2 = BTreeSet::new();
        let walker = Walker {
            source: self.source,
            scope: &scope,
        };
        walker.collect_children(root, &mut bf2);
        if walker.is_indexed_invocation(root) {
            bf2.insert(NodeType::IndexedInvocation);
        }
        Ok(LineFeatures::new(line_id, bf1, bf2))
    }
}

fn first_error(node: Node<'_>) -> Option<Node<'_>> {
    if node.is_error() || node.is_missing() {
        return Some(node);
    }
    let mut cursor = node.walk();
    let children: Vec<_> = node.children(&mut cursor).collect();
    children.into_iter().filter(|c| c.has_error()).find_map(first_error)
}

fn covers_row(node: Node<'_>, row: usize) -> bool {
    node.start_position().row <= row && row <= node.end_position().row
}

fn contains(outer: Node<'_>, inner: Node<'_>) -> bool {
    outer.start_byte() <= inner.start_byte() && inner.end_byte() <= outer.end_byte()
}

fn has_substantive_token(node: Node<'_>, row: usize) -> bool {
    if !covers_row(node, row) {
        return false;
    }
    if COMMENT_KINDS.contains(&node.kind()) {
        return false;
    }
    if node.child_count() == 0 {
        return !matches!(node.kind(), "{" | "}" | ";");
    }
    let mut cursor = node.walk();
    let children: Vec<_> = node.children(&mut cursor).collect();
    children.into_iter().any(|c| has_substantive_token(c, row))
}

fn is_statement(node: Node<'_>) -> bool {
    let kind = node.kind();
    if !STATEMENT_KINDS.contains(&kind) {
        return false;
    }
    match kind {
        // A switch is a statement only when it is not used as a value.
        "switch_expression" => node
            .parent()
            .map(|p| {
                matches!(
                    p.kind(),
                    "block" | "switch_block_statement_group" | "labeled_statement" | "constructor_body"
                ) || is_statement(p)
            })
            .unwrap_or(false),
        // The initializer of a classic for loop belongs to the loop header.
        "local_variable_declaration" => node.parent().map(|p| p.kind() != "for_statement").unwrap_or(true),
        _ => true,
    }
}

fn collect_covering_statements<'t>(node: Node<'t>, row: usize, out: &mut Vec<Node<'t>>) {
    if !covers_row(node, row) {
        return;
    }
    if node.is_named() && is_statement(node) {
        out.push(node);
    }
    let mut cursor = node.walk();
    let children: Vec<_> = node.named_children(&mut cursor).collect();
    for child in children {
        collect_covering_statements(child, row, out);
    }
}

/// Canonical statement type, and the node whose descendants form the child
/// features. An expression statement is typed by its expression.
fn statement_type(stmt: Node<'_>) -> (NodeType, Node<'_>) {
    let kind = stmt.kind();
    let nt = match kind {
        "expression_statement" => {
            let expr = stmt.named_child(0).expect("expression statement has an expression");
            let nt = match expr.kind() {
                "method_invocation" => NodeType::Invocation,
                "assignment_expression" => NodeType::Assignment,
                "update_expression" | "unary_expression" => NodeType::UnaryOperator,
                "object_creation_expression" => NodeType::ConstructorCall,
                "switch_expression" => NodeType::Switch,
                other => NodeType::Other(other.to_string()),
            };
            return (nt, expr);
        }
        "explicit_constructor_invocation" => NodeType::Invocation,
        "local_variable_declaration" => NodeType::LocalVariable,
        "field_declaration" => NodeType::FieldDeclaration,
        "if_statement" => NodeType::If,
        "for_statement" | "enhanced_for_statement" | "while_statement" | "do_statement" => NodeType::Loop,
        "return_statement" => NodeType::Return,
        "throw_statement" => NodeType::Throw,
        "break_statement" => NodeType::Break,
        "continue_statement" => NodeType::Continue,
        "try_statement" | "try_with_resources_statement" => NodeType::Try,
        "switch_expression" => NodeType::Switch,
        "synchronized_statement" => NodeType::Synchronized,
        "assert_statement" => NodeType::Assert,
        "yield_statement" => NodeType::Yield,
        other => NodeType::Other(other.to_string()),
    };
    (nt, stmt)
}

/// Names visible around a statement, used to tell field reads from local
/// variable reads.
struct Scope {
    fields: HashSet<String>,
    locals: HashSet<String>,
}

impl Scope {
    fn around(stmt: Node<'_>, source: &str) -> Self {
        let mut fields = HashSet::new();
        let mut locals = HashSet::new();
        let mut callable_seen = false;
        let mut cur = stmt.parent();
        while let Some(node) = cur {
            match node.kind() {
                "class_body" | "enum_body_declarations" | "interface_body" => {
                    let mut cursor = node.walk();
                    let members: Vec<_> = node.named_children(&mut cursor).collect();
                    for member in members {
                        if matches!(member.kind(), "field_declaration" | "constant_declaration") {
                            declared_names(member, source, &mut fields);
                        }
                    }
                }
                "enum_body" => {
                    let mut cursor = node.walk();
                    let members: Vec<_> = node.named_children(&mut cursor).collect();
                    for member in members {
                        if member.kind() == "enum_constant" {
                            if let Some(name) = member.child_by_field_name("name") {
                                fields.insert(text(name, source).to_string());
                            }
                        }
                    }
                }
                "record_declaration" => {
                    if let Some(params) = node.child_by_field_name("parameters") {
                        declared_names(params, source, &mut fields);
                    }
                }
                "method_declaration"
                | "constructor_declaration"
                | "compact_constructor_declaration"
                | "static_initializer"
                | "lambda_expression"
                    if !callable_seen =>
                {
                    declared_names(node, source, &mut locals);
                    if node.kind() != "lambda_expression" {
                        callable_seen = true;
                    }
                }
                _ => {}
            }
            cur = node.parent();
        }
        // A statement that is itself a field declaration sees its own class.
        if stmt.kind() == "field_declaration" {
            declared_names(stmt, source, &mut fields);
        }
        Self { fields, locals }
    }
}

/// Declared variable names within `node`, not descending into nested types.
fn declared_names(node: Node<'_>, source: &str, out: &mut HashSet<String>) {
    let mut cursor = node.walk();
    let children: Vec<_> = node.named_children(&mut cursor).collect();
    for child in children {
        match child.kind() {
            "class_body" | "interface_body" | "enum_body" => continue,
            "identifier" if is_declaration_name(child) => {
                out.insert(text(child, source).to_string());
            }
            _ => {}
        }
        declared_names(child, source, out);
    }
}

fn is_declaration_name(ident: Node<'_>) -> bool {
    let Some(parent) = ident.parent() else {
        return false;
    };
    match parent.kind() {
        "variable_declarator"
        | "formal_parameter"
        | "catch_formal_parameter"
        | "enhanced_for_statement"
        | "resource" => field_of(parent, ident).as_deref() == Some("name"),
        "inferred_parameters" => true,
        "lambda_expression" => field_of(parent, ident).as_deref() == Some("parameters"),
        _ => false,
    }
}

fn field_of(parent: Node<'_>, child: Node<'_>) -> Option<String> {
    let mut cursor = parent.walk();
    if !cursor.goto_first_child() {
        return None;
    }
    loop {
        if cursor.node().id() == child.id() {
            return cursor.field_name().map(str::to_string);
        }
        if !cursor.goto_next_sibling() {
            return None;
        }
    }
}

fn text<'a>(node: Node<'_>, source: &'a str) -> &'a str {
    &source[node.start_byte()..node.end_byte()]
}

struct Walker<'a> {
    source: &'a str,
    scope: &'a Scope,
}

impl Walker<'_> {
    fn collect_children(&self, node: Node<'_>, out: &mut BTreeSet<NodeType>) {
        let mut cursor = node.walk();
        if !cursor.goto_first_child() {
            return;
        }
        loop {
            let child = cursor.node();
            let field = cursor.field_name();
            if child.is_named() {
                self.visit(node, field, child, out);
            }
            if !cursor.goto_next_sibling() {
                break;
            }
        }
    }

    fn visit(&self, parent: Node<'_>, field: Option<&str>, node: Node<'_>, out: &mut BTreeSet<NodeType>) {
        let kind = node.kind();
        if COMMENT_KINDS.contains(&kind) || TYPE_KINDS.contains(&kind) || NESTED_BODY_KINDS.contains(&kind) {
            return;
        }
        if is_statement(node) {
            return;
        }
        if LITERAL_KINDS.contains(&kind) {
            out.insert(NodeType::Literal);
            return;
        }
        if kind == "identifier" {
            if let Some(nt) = self.identifier_type(parent, field, node) {
                out.insert(nt);
            }
            return;
        }
        if let Some(nt) = expression_type(kind) {
            out.insert(nt);
        }
        if self.is_indexed_invocation(node) {
            out.insert(NodeType::IndexedInvocation);
        }
        self.collect_children(node, out);
    }

    fn is_indexed_invocation(&self, node: Node<'_>) -> bool {
        if node.kind() != "method_invocation" {
            return false;
        }
        let named = node
            .child_by_field_name("name")
            .map(|n| INDEXED_ACCESSORS.contains(&text(n, self.source)))
            .unwrap_or(false);
        let has_args = node
            .child_by_field_name("arguments")
            .map(|a| a.named_child_count() > 0)
            .unwrap_or(false);
        named && has_args
    }

    fn identifier_type(&self, parent: Node<'_>, field: Option<&str>, ident: Node<'_>) -> Option<NodeType> {
        if is_declaration_name(ident) {
            return None;
        }
        match (parent.kind(), field) {
            ("method_invocation", Some("name"))
            | ("field_access", Some("field"))
            | ("method_reference", _)
            | ("labeled_statement", _)
            | ("break_statement", _)
            | ("continue_statement", _)
            | ("object_creation_expression", _)
            | ("scoped_identifier", _) => return None,
            _ => {}
        }
        let name = text(ident, self.source);
        let is_local = self.scope.locals.contains(name);
        if !is_local && self.scope.fields.contains(name) {
            return Some(NodeType::FieldAccess);
        }
        if parent.kind() == "assignment_expression" && field == Some("left") {
            return Some(NodeType::VariableWrite);
        }
        let receiver = matches!(
            (parent.kind(), field),
            ("method_invocation", Some("object")) | ("field_access", Some("object"))
        );
        if receiver && !is_local && name.starts_with(|c: char| c.is_ascii_uppercase()) {
            return Some(NodeType::TypeAccess);
        }
        Some(NodeType::VariableRead)
    }
}

/// Canonical type of an expression-level grammar kind; `None` for purely
/// structural nodes such as argument lists.
fn expression_type(kind: &str) -> Option<NodeType> {
    let nt = match kind {
        "method_invocation" | "explicit_constructor_invocation" => NodeType::Invocation,
        "assignment_expression" => NodeType::Assignment,
        "binary_expression" => NodeType::BinaryOperator,
        "unary_expression" | "update_expression" => NodeType::UnaryOperator,
        "cast_expression" => NodeType::Cast,
        "array_access" => NodeType::ArrayAccess,
        "array_creation_expression" | "array_initializer" => NodeType::NewArray,
        "object_creation_expression" => NodeType::ConstructorCall,
        "ternary_expression" => NodeType::Conditional,
        "instanceof_expression" => NodeType::InstanceOf,
        "lambda_expression" => NodeType::Lambda,
        "method_reference" => NodeType::MethodReference,
        "field_access" => NodeType::FieldAccess,
        "this" => NodeType::ThisAccess,
        "super" => NodeType::SuperAccess,
        "switch_expression" => NodeType::Switch,
        "argument_list"
        | "parenthesized_expression"
        | "variable_declarator"
        | "dimensions_expr"
        | "formal_parameters"
        | "formal_parameter"
        | "inferred_parameters"
        | "resource_specification"
        | "resource"
        | "condition"
        | "catch_formal_parameter"
        | "catch_type"
        | "string_fragment"
        | "escape_sequence"
        | "local_variable_declaration"
        | "type_pattern"
        | "pattern"
        | "record_pattern"
        | "guard" => return None,
        other => NodeType::Other(other.to_string()),
    };
    Some(nt)
}
