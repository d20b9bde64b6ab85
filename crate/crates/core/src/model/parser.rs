use std::fmt;

use serde::{Deserialize, Serialize};

use super::lexer::{is_keyword, tokenize, Tok, Token};
use super::*;

/// A syntax or validation error at a source position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(span: Span, message: impl Into<String>) -> Self {
        ParseError {
            line: span.line.max(1),
            column: span.column.max(1),
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Parses and validates model source.
///
/// Returns every syntax error found (the parser resynchronises at the next
/// `object`, `rule` or `service`), or, for syntactically valid input, every
/// error-severity diagnostic from [`validate_model`].
pub fn parse_model(source: &str) -> Result<DecisionModel, Vec<ParseError>> {
    let model = parse_model_unchecked(source)?;
    let errors: Vec<ParseError> = validate_model(&model)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| ParseError::at(d.span.unwrap_or_default(), d.message))
        .collect();
    if errors.is_empty() {
        Ok(model)
    } else {
        Err(errors)
    }
}

/// Parses model source without running [`validate_model`].
pub fn parse_model_unchecked(source: &str) -> Result<DecisionModel, Vec<ParseError>> {
    let tokens = tokenize(source).map_err(|e| vec![e])?;
    if tokens.len() == 1 {
        return Err(vec![ParseError::at(Span::new(1, 1), "empty model")]);
    }
    Parser::new(tokens).model()
}

/// Parses a single literal as printed by the model printer.
pub fn parse_literal(text: &str) -> Result<Literal, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser::new(tokens);
    let lit = p.literal()?;
    p.expect_eof()?;
    Ok(lit)
}

/// Parses a bracketed literal list such as `["a", "b"]`.
pub fn parse_domain(text: &str) -> Result<Vec<Literal>, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser::new(tokens);
    let values = p.literal_list()?;
    p.expect_eof()?;
    Ok(values)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Parser { tokens, pos: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn advance(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError::at(
            self.span(),
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn at_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == sym)
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if self.at_sym(sym) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, sym: &str) -> PResult<()> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            self.error(&format!("`{sym}`"))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.error("end of input")
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                let span = self.span();
                self.advance();
                Ok((s, span))
            }
            _ => self.error("identifier"),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.error("string literal"),
        }
    }

    fn at_item_start(&self) -> bool {
        self.at_keyword("object")
            || self.at_keyword("rule")
            || self.at_keyword("service")
            || matches!(self.peek(), Tok::Eof)
    }

    fn model(&mut self) -> Result<DecisionModel, Vec<ParseError>> {
        let mut errors = Vec::new();
        let header = (|| -> PResult<(String, Option<String>)> {
            self.expect_keyword("model")?;
            let (name, _) = self.ident()?;
            let version = match self.peek() {
                Tok::Str(_) => Some(self.string()?),
                _ => None,
            };
            Ok((name, version))
        })();
        let mut model = match header {
            Ok((name, version)) => DecisionModel {
                version,
                ..DecisionModel::empty(name)
            },
            Err(e) => {
                errors.push(e);
                self.recover();
                DecisionModel::empty("")
            }
        };

        while !matches!(self.peek(), Tok::Eof) {
            let item = if self.at_keyword("object") {
                self.object().map(|o| model.object_model.push(o))
            } else if self.at_keyword("rule") {
                self.rule().map(|r| model.rule_model.push(r))
            } else if self.at_keyword("service") {
                self.service().map(|s| model.service_model.push(s))
            } else {
                self.error("`object`, `rule` or `service`")
            };
            if let Err(e) = item {
                errors.push(e);
                self.recover();
            }
        }
        if errors.is_empty() {
            Ok(model)
        } else {
            Err(errors)
        }
    }

    fn recover(&mut self) {
        self.advance();
        while !self.at_item_start() {
            self.advance();
        }
    }

    fn object(&mut self) -> PResult<ObjectType> {
        let span = self.span();
        self.expect_keyword("object")?;
        let (name, _) = self.ident()?;
        self.expect_sym("{")?;
        let mut object = ObjectType {
            name,
            variables: Vec::new(),
            relations: Vec::new(),
            span,
        };
        while !self.eat_sym("}") {
            if self.at_keyword("relates_to") {
                let span = self.span();
                self.advance();
                let (target, _) = self.ident()?;
                self.expect_keyword("as")?;
                let (name, _) = self.ident()?;
                object.relations.push(Relation { target, name, span });
            } else if matches!(self.peek(), Tok::Ident(_)) && !self.at_keyword("relates_to") {
                object.variables.push(self.vardecl()?);
            } else {
                return self.error("variable declaration, `relates_to` or `}`");
            }
        }
        Ok(object)
    }

    fn vardecl(&mut self) -> PResult<VariableDecl> {
        let (name, span) = self.ident()?;
        self.expect_sym(":")?;
        let kind = match self.peek() {
            Tok::Ident(s) => Kind::from_keyword(s),
            _ => None,
        };
        let Some(kind) = kind else {
            return self.error("variable kind (boolean, number, money, date, text or enum)");
        };
        self.advance();
        let mut domain = None;
        if self.eat_keyword("in") {
            domain = Some(self.literal_list()?);
        }
        let unit = if self.eat_keyword("unit") {
            Some(self.string()?)
        } else {
            None
        };
        Ok(VariableDecl {
            name,
            kind,
            domain,
            unit,
            span,
        })
    }

    fn literal_list(&mut self) -> PResult<Vec<Literal>> {
        self.expect_sym("[")?;
        let mut values = Vec::new();
        if !self.eat_sym("]") {
            loop {
                values.push(self.literal()?);
                if self.eat_sym("]") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        Ok(values)
    }

    fn literal(&mut self) -> PResult<Literal> {
        let negative = self.eat_sym("-");
        let lit = match self.peek().clone() {
            Tok::Number(n) => Literal::Number(if negative { -n } else { n }),
            _ if negative => return self.error("number"),
            Tok::Date(d) => Literal::Date(d),
            Tok::Str(s) => Literal::Text(s),
            Tok::Ident(s) if s == "true" => Literal::Bool(true),
            Tok::Ident(s) if s == "false" => Literal::Bool(false),
            _ => return self.error("literal"),
        };
        self.advance();
        Ok(lit)
    }

    fn at_literal(&self) -> bool {
        match self.peek() {
            Tok::Number(_) | Tok::Date(_) | Tok::Str(_) => true,
            Tok::Ident(s) => s == "true" || s == "false",
            Tok::Sym("-") => matches!(self.peek_at(1), Tok::Number(_)),
            _ => false,
        }
    }

    fn rule(&mut self) -> PResult<Rule> {
        let span = self.span();
        self.expect_keyword("rule")?;
        let (name, _) = self.ident()?;
        let source = if self.eat_keyword("source") {
            let label = self.string()?;
            let uri = self.string()?;
            Some(SourceRef { label, uri })
        } else {
            None
        };
        let condition = if self.eat_keyword("if") {
            Some(self.disjunction()?)
        } else {
            None
        };
        self.expect_keyword("then")?;
        let (target, target_span) = self.ident()?;
        let target = VarRef::at(target, target_span);
        self.expect_sym("=")?;
        let expr = self.expr()?;
        let action = match expr {
            Expr::Literal(value) => Action::Derivation { target, value },
            expr => Action::Calculation { target, expr },
        };
        Ok(Rule {
            name,
            source,
            condition,
            action,
            span,
        })
    }

    fn disjunction(&mut self) -> PResult<Condition> {
        let mut parts = vec![self.conjunction()?];
        while self.eat_keyword("or") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Condition::Or(parts)
        })
    }

    fn conjunction(&mut self) -> PResult<Condition> {
        let mut parts = vec![self.unary()?];
        while self.eat_keyword("and") {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Condition::And(parts)
        })
    }

    fn unary(&mut self) -> PResult<Condition> {
        if self.eat_keyword("not") {
            return Ok(Condition::Not(Box::new(self.unary()?)));
        }
        if self.eat_sym("(") {
            let inner = self.disjunction()?;
            self.expect_sym(")")?;
            return Ok(inner);
        }
        let (name, span) = self.ident()?;
        let variable = VarRef::at(name, span);
        let comparator = match self.peek() {
            Tok::Sym(s) => Comparator::from_symbol(s),
            _ => None,
        };
        let Some(comparator) = comparator else {
            // A bare boolean variable stands for `v = true`.
            return Ok(Condition::Atom(Atom {
                variable,
                comparator: Comparator::Eq,
                operand: Operand::Literal(Literal::Bool(true)),
            }));
        };
        self.advance();
        let operand = if self.at_literal() {
            Operand::Literal(self.literal()?)
        } else {
            let (name, span) = self.ident()?;
            Operand::Variable(VarRef::at(name, span))
        };
        Ok(Condition::Atom(Atom {
            variable,
            comparator,
            operand,
        }))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.at_sym("+") {
                ArithOp::Add
            } else if self.at_sym("-") {
                ArithOp::Sub
            } else {
                return Ok(lhs);
            };
            self.advance();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.at_sym("*") {
                ArithOp::Mul
            } else if self.at_sym("/") {
                ArithOp::Div
            } else {
                return Ok(lhs);
            };
            self.advance();
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        if self.at_literal() {
            return Ok(Expr::Literal(self.literal()?));
        }
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        if self.eat_sym("(") {
            let inner = self.expr()?;
            self.expect_sym(")")?;
            return Ok(inner);
        }
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let (name, span) = self.ident()?;
                Ok(Expr::Var(VarRef::at(name, span)))
            }
            _ => self.error("expression"),
        }
    }

    fn service(&mut self) -> PResult<Service> {
        let span = self.span();
        self.expect_keyword("service")?;
        let (name, _) = self.ident()?;
        self.expect_sym("{")?;
        let mut service = Service {
            name,
            input_messages: Vec::new(),
            output_messages: Vec::new(),
            span,
        };
        while !self.eat_sym("}") {
            let is_input = if self.eat_keyword("in") {
                true
            } else if self.eat_keyword("out") {
                false
            } else {
                return self.error("`in`, `out` or `}`");
            };
            let (msg_name, msg_span) = self.ident()?;
            self.expect_sym("(")?;
            let mut variables = Vec::new();
            if !self.eat_sym(")") {
                loop {
                    let (v, s) = self.ident()?;
                    variables.push(VarRef::at(v, s));
                    if self.eat_sym(")") {
                        break;
                    }
                    self.expect_sym(",")?;
                }
            }
            let message = Message {
                name: msg_name,
                variables,
                span: msg_span,
            };
            if is_input {
                service.input_messages.push(message);
            } else {
                service.output_messages.push(message);
            }
        }
        Ok(service)
    }
}
