#![allow(dead_code)]

use pepr_core::features::NodeType;
use NodeType::*;

pub const INVENTORY_JAVA: &str = include_str!("../fixtures/Inventory.java");

/// Hand-labeled (line, statement type, child types) for `Inventory.java`.
pub fn inventory_labels() -> Vec<(u32, NodeType, Vec<NodeType>)> {
    vec![
        (7, FieldDeclaration, vec![ConstructorCall]),
        (8, FieldDeclaration, vec![NewArray, Literal]),
        (9, FieldDeclaration, vec![]),
        (12, Invocation, vec![SuperAccess]),
        (13, Assignment, vec![FieldAccess, ThisAccess, VariableRead]),
        (17, Return, vec![Literal]),
        (
            21,
            Loop,
            vec![
                Literal,
                BinaryOperator,
                VariableRead,
                Invocation,
                FieldAccess,
                UnaryOperator,
            ],
        ),
        (
            22,
            Invocation,
            vec![ThisAccess, Invocation, IndexedInvocation, FieldAccess, VariableRead],
        ),
        (24, LocalVariable, vec![Cast, VariableRead]),
        (25, LocalVariable, vec![Invocation]),
        (
            26,
            Assignment,
            vec![FieldAccess, BinaryOperator, ArrayAccess, VariableRead, Literal],
        ),
        (27, Assignment, vec![ArrayAccess, FieldAccess, Literal]),
        (28, If, vec![BinaryOperator, VariableRead, Literal]),
        (29, Throw, vec![ConstructorCall, Literal]),
        (31, Loop, vec![BinaryOperator, FieldAccess, Literal]),
        (32, UnaryOperator, vec![FieldAccess]),
        (33, Break, vec![]),
        (35, Loop, vec![FieldAccess]),
        (36, Continue, vec![]),
        (38, LocalVariable, vec![Lambda, Invocation, VariableRead]),
        (39, LocalVariable, vec![Conditional, InstanceOf, VariableRead, Literal]),
        (40, LocalVariable, vec![NewArray, Literal]),
        (41, Invocation, vec![TypeAccess, VariableRead, FieldAccess]),
        (42, ConstructorCall, vec![]),
        (43, Assert, vec![BinaryOperator, FieldAccess, Literal]),
        (44, Synchronized, vec![ThisAccess]),
        (45, Assignment, vec![FieldAccess, UnaryOperator]),
        (47, Try, vec![]),
        (48, Invocation, vec![]),
        (49, Try, vec![]),
        (50, Return, vec![]),
        (52, LocalVariable, vec![Invocation, IndexedInvocation, VariableRead]),
        (56, Invocation, vec![FieldAccess, VariableRead]),
        (60, Return, vec![FieldAccess]),
    ]
}

/// Lines of `Inventory.java` that hold no statement.
pub const INVENTORY_NON_STATEMENT_LINES: &[u32] = &[1, 6, 10, 14, 20, 23, 53, 62];

/// Hand-built failing-test logs and the error each should yield.
pub fn test_logs() -> Vec<(&'static str, Option<&'static str>)> {
    vec![
        (
            "--- org.example.stock.InventoryTest::testWalk\n\
             java.lang.IndexOutOfBoundsException: Index 4 out of bounds for length 4\n\
             \tat java.util.ArrayList.get(ArrayList.java:427)\n\
             \tat org.example.stock.Inventory.walk(Inventory.java:22)\n",
            Some("java.lang.IndexOutOfBoundsException"),
        ),
        (
            "--- org.example.stock.InventoryTest::testSize\n\
             junit.framework.AssertionFailedError: expected:<1> but was:<0>\n\
             \tat junit.framework.Assert.fail(Assert.java:57)\n",
            None,
        ),
        (
            "--- org.example.stock.InventoryTest::testSize\n\
             junit.framework.AssertionFailedError: expected:<1> but was:<0>\n\
             \tat junit.framework.Assert.fail(Assert.java:57)\n\
             --- org.example.stock.InventoryTest::testCast\n\
             java.lang.ClassCastException: java.lang.Integer cannot be cast to java.lang.String\n\
             \tat org.example.stock.Inventory.walk(Inventory.java:24)\n",
            Some("java.lang.ClassCastException"),
        ),
        (
            "Exception in thread \"main\" java.lang.NullPointerException\n\
             \tat org.example.stock.Inventory.walk(Inventory.java:28)\n\
             Caused by: java.lang.IllegalStateException: closed\n",
            Some("java.lang.NullPointerException"),
        ),
        ("", None),
    ]
}
