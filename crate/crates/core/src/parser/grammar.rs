//! Recursive descent parser producing an unresolved syntax tree. Name
//! resolution happens in a second pass so components may be declared in any
//! order.

use super::lexer::{Keyword, Token, TokenKind};
use super::{Diagnostic, Span};
use crate::model::Emission;

#[derive(Debug, Clone)]
pub struct Ident {
    pub text: String,
    pub span: Span,
}

/// A reference as written: `Component.source` or a bare operator name.
#[derive(Debug, Clone)]
pub struct RawRef {
    pub qualifier: Option<Ident>,
    pub name: Ident,
}

impl RawRef {
    pub fn span(&self) -> Span {
        self.qualifier
            .as_ref()
            .map(|q| q.span)
            .unwrap_or(self.name.span)
    }
}

#[derive(Debug)]
pub struct RawArch {
    pub name: Ident,
    pub types: Vec<RawType>,
    pub sensors: Vec<RawSensor>,
    pub contexts: Vec<RawContext>,
    pub controllers: Vec<RawController>,
    pub actuators: Vec<RawActuator>,
}

#[derive(Debug)]
pub struct RawType {
    pub name: Ident,
    pub supertype: Option<Ident>,
}

#[derive(Debug)]
pub struct RawSource {
    pub name: Ident,
    pub value_type: Ident,
    pub pull_params: Option<Vec<Ident>>,
}

#[derive(Debug)]
pub struct RawSensor {
    pub id: Ident,
    pub sources: Vec<RawSource>,
}

#[derive(Debug)]
pub enum RawActivation {
    Push { terms: Vec<Vec<RawRef>> },
    Pull { span: Span },
}

#[derive(Debug)]
pub struct RawBasic {
    pub activation: RawActivation,
    pub requirements: Vec<RawRef>,
    pub emission: Emission,
}

#[derive(Debug)]
pub struct RawContext {
    pub id: Ident,
    pub value_type: Ident,
    pub pull_params: Option<Vec<Ident>>,
    pub basics: Vec<RawBasic>,
}

#[derive(Debug)]
pub struct RawRule {
    pub trigger: RawRef,
    pub actuator: Ident,
    pub action: Ident,
}

#[derive(Debug)]
pub struct RawController {
    pub id: Ident,
    pub rules: Vec<RawRule>,
}

#[derive(Debug)]
pub struct RawActuator {
    pub id: Ident,
    pub actions: Vec<(Ident, Vec<Ident>)>,
}

pub fn parse_tokens(tokens: Vec<Token>) -> Result<RawArch, Vec<Diagnostic>> {
    let mut p = Parser {
        tokens,
        pos: 0,
        diags: Vec::new(),
    };
    let arch = p.architecture();
    match arch {
        Some(a) if p.diags.is_empty() => Ok(a),
        _ => Err(p.diags),
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek().kind == kind
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.at(kind) {
            self.next();
            true
        } else {
            false
        }
    }

    fn error_here(&mut self, msg: impl Into<String>) {
        let span = self.peek().span;
        self.diags.push(Diagnostic::error(msg, span));
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Option<Token> {
        if self.at(kind) {
            Some(self.next())
        } else {
            let found = describe(self.peek());
            self.error_here(format!("expected {what}, found {found}"));
            None
        }
    }

    fn ident(&mut self, what: &str) -> Option<Ident> {
        match self.peek().kind {
            TokenKind::Ident => {
                let t = self.next();
                Some(Ident {
                    text: t.text,
                    span: t.span,
                })
            }
            TokenKind::Keyword(Keyword::SelfWord) => {
                self.error_here(format!("`self` is reserved and cannot name {what}"));
                self.next();
                None
            }
            _ => {
                let found = describe(self.peek());
                self.error_here(format!("expected {what}, found {found}"));
                None
            }
        }
    }

    /// Skip to the next top-level declaration keyword so one bad declaration
    /// does not swallow the rest of the file.
    fn recover_to_decl(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek().kind {
                TokenKind::Eof => return,
                TokenKind::LBrace => {
                    depth += 1;
                    self.next();
                }
                TokenKind::RBrace => {
                    self.next();
                    if depth <= 1 {
                        return;
                    }
                    depth -= 1;
                }
                TokenKind::Keyword(
                    Keyword::Type
                    | Keyword::Sensor
                    | Keyword::Context
                    | Keyword::Controller
                    | Keyword::Actuator,
                ) if depth == 0 => return,
                _ => {
                    self.next();
                }
            }
        }
    }

    fn architecture(&mut self) -> Option<RawArch> {
        self.expect(TokenKind::Keyword(Keyword::Architecture), "`architecture`")?;
        let name = self.ident("an architecture name")?;
        self.expect(TokenKind::Semicolon, "`;`")?;
        let mut arch = RawArch {
            name,
            types: Vec::new(),
            sensors: Vec::new(),
            contexts: Vec::new(),
            controllers: Vec::new(),
            actuators: Vec::new(),
        };
        while !self.at(TokenKind::Eof) {
            let ok = match self.peek().kind {
                TokenKind::Keyword(Keyword::Type) => self.type_decl(&mut arch),
                TokenKind::Keyword(Keyword::Sensor) => self.sensor(&mut arch),
                TokenKind::Keyword(Keyword::Context) => self.context(&mut arch),
                TokenKind::Keyword(Keyword::Controller) => self.controller(&mut arch),
                TokenKind::Keyword(Keyword::Actuator) => self.actuator(&mut arch),
                _ => {
                    let found = describe(self.peek());
                    self.error_here(format!("expected a declaration, found {found}"));
                    false
                }
            };
            if !ok {
                self.recover_to_decl();
            }
        }
        Some(arch)
    }

    fn type_decl(&mut self, arch: &mut RawArch) -> bool {
        self.next(); // `type`
        let Some(name) = self.ident("a type name") else {
            return false;
        };
        let supertype = if self.eat(TokenKind::Keyword(Keyword::Extends)) {
            match self.ident("a supertype name") {
                Some(s) => Some(s),
                None => return false,
            }
        } else {
            None
        };
        if self.expect(TokenKind::Semicolon, "`;`").is_none() {
            return false;
        }
        arch.types.push(RawType { name, supertype });
        true
    }

    fn type_list(&mut self) -> Option<Vec<Ident>> {
        self.expect(TokenKind::LParen, "`(`")?;
        let mut out = Vec::new();
        if !self.at(TokenKind::RParen) {
            loop {
                out.push(self.ident("a type name")?);
                if !self.eat(TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "`)`")?;
        Some(out)
    }

    fn pulled_with(&mut self) -> Option<Option<Vec<Ident>>> {
        if self.eat(TokenKind::Keyword(Keyword::Pulled)) {
            self.expect(TokenKind::Keyword(Keyword::With), "`with`")?;
            Some(Some(self.type_list()?))
        } else {
            Some(None)
        }
    }

    fn sensor(&mut self, arch: &mut RawArch) -> bool {
        self.next(); // `sensor`
        let Some(id) = self.ident("a sensor name") else {
            return false;
        };
        if self.expect(TokenKind::LBrace, "`{`").is_none() {
            return false;
        }
        let mut sources = Vec::new();
        while self.at(TokenKind::Keyword(Keyword::Source)) {
            self.next();
            let Some(name) = self.ident("a source name") else {
                return false;
            };
            if self.expect(TokenKind::Colon, "`:`").is_none() {
                return false;
            }
            let Some(value_type) = self.ident("a type name") else {
                return false;
            };
            let Some(pull_params) = self.pulled_with() else {
                return false;
            };
            if self.expect(TokenKind::Semicolon, "`;`").is_none() {
                return false;
            }
            sources.push(RawSource {
                name,
                value_type,
                pull_params,
            });
        }
        if sources.is_empty() {
            self.error_here("a sensor must declare at least one source");
            return false;
        }
        if self.expect(TokenKind::RBrace, "`}`").is_none() {
            return false;
        }
        arch.sensors.push(RawSensor { id, sources });
        true
    }

    fn reference(&mut self) -> Option<RawRef> {
        let first = self.ident("a component or source reference")?;
        if self.eat(TokenKind::Dot) {
            let name = self.ident("a source name")?;
            Some(RawRef {
                qualifier: Some(first),
                name,
            })
        } else {
            Some(RawRef {
                qualifier: None,
                name: first,
            })
        }
    }

    fn disjunction(&mut self) -> Option<Vec<RawRef>> {
        let mut members = vec![self.reference()?];
        while self.eat(TokenKind::Pipe) {
            members.push(self.reference()?);
        }
        Some(members)
    }

    fn basic(&mut self) -> Option<RawBasic> {
        self.expect(TokenKind::Keyword(Keyword::Contract), "`contract`")?;
        self.expect(TokenKind::Keyword(Keyword::On), "`on`")?;
        let activation = if self.at(TokenKind::Keyword(Keyword::Push)) {
            self.next();
            self.expect(TokenKind::LParen, "`(`")?;
            let mut terms = vec![self.disjunction()?];
            while self.eat(TokenKind::Comma) {
                terms.push(self.disjunction()?);
            }
            self.expect(TokenKind::RParen, "`)`")?;
            RawActivation::Push { terms }
        } else if self.at(TokenKind::Keyword(Keyword::Pull)) {
            let t = self.next();
            RawActivation::Pull { span: t.span }
        } else {
            self.error_here("expected `push` or `pull`");
            return None;
        };
        let mut requirements = Vec::new();
        if self.eat(TokenKind::Keyword(Keyword::Get)) {
            self.expect(TokenKind::LParen, "`(`")?;
            if !self.at(TokenKind::RParen) {
                loop {
                    requirements.push(self.reference()?);
                    if !self.eat(TokenKind::Comma) {
                        break;
                    }
                }
            }
            self.expect(TokenKind::RParen, "`)`")?;
        }
        let emission = if self.eat(TokenKind::Keyword(Keyword::Always)) {
            Emission::Always
        } else if self.eat(TokenKind::Keyword(Keyword::Maybe)) {
            Emission::Maybe
        } else if self.eat(TokenKind::Keyword(Keyword::No)) {
            Emission::Never
        } else {
            self.error_here("expected `always`, `maybe` or `no`");
            return None;
        };
        self.expect(TokenKind::Keyword(Keyword::Publish), "`publish`")?;
        self.expect(TokenKind::Semicolon, "`;`")?;
        Some(RawBasic {
            activation,
            requirements,
            emission,
        })
    }

    fn context(&mut self, arch: &mut RawArch) -> bool {
        self.next(); // `context`
        let Some(id) = self.ident("a context operator name") else {
            return false;
        };
        if self.expect(TokenKind::Colon, "`:`").is_none() {
            return false;
        }
        let Some(value_type) = self.ident("a type name") else {
            return false;
        };
        let Some(pull_params) = self.pulled_with() else {
            return false;
        };
        if self.expect(TokenKind::LBrace, "`{`").is_none() {
            return false;
        }
        let mut basics = Vec::new();
        while self.at(TokenKind::Keyword(Keyword::Contract)) {
            match self.basic() {
                Some(b) => basics.push(b),
                None => return false,
            }
        }
        if basics.is_empty() {
            self.error_here("a context operator must declare at least one contract");
            return false;
        }
        if self.expect(TokenKind::RBrace, "`}`").is_none() {
            return false;
        }
        arch.contexts.push(RawContext {
            id,
            value_type,
            pull_params,
            basics,
        });
        true
    }

    fn controller(&mut self, arch: &mut RawArch) -> bool {
        self.next(); // `controller`
        let Some(id) = self.ident("a controller name") else {
            return false;
        };
        if self.expect(TokenKind::LBrace, "`{`").is_none() {
            return false;
        }
        let mut rules = Vec::new();
        while self.at(TokenKind::Keyword(Keyword::On)) {
            self.next();
            if self
                .expect(TokenKind::Keyword(Keyword::Push), "`push`")
                .is_none()
            {
                return false;
            }
            if self.expect(TokenKind::LParen, "`(`").is_none() {
                return false;
            }
            let Some(trigger) = self.reference() else {
                return false;
            };
            if self.expect(TokenKind::RParen, "`)`").is_none() {
                return false;
            }
            if self
                .expect(TokenKind::Keyword(Keyword::Do), "`do`")
                .is_none()
            {
                return false;
            }
            let Some(actuator) = self.ident("an actuator name") else {
                return false;
            };
            if self.expect(TokenKind::Dot, "`.`").is_none() {
                return false;
            }
            let Some(action) = self.ident("an action name") else {
                return false;
            };
            if self.expect(TokenKind::Semicolon, "`;`").is_none() {
                return false;
            }
            rules.push(RawRule {
                trigger,
                actuator,
                action,
            });
        }
        if rules.is_empty() {
            self.error_here("a controller must declare at least one `on push(...) do ...` rule");
            return false;
        }
        if self.expect(TokenKind::RBrace, "`}`").is_none() {
            return false;
        }
        arch.controllers.push(RawController { id, rules });
        true
    }

    fn actuator(&mut self, arch: &mut RawArch) -> bool {
        self.next(); // `actuator`
        let Some(id) = self.ident("an actuator name") else {
            return false;
        };
        if self.expect(TokenKind::LBrace, "`{`").is_none() {
            return false;
        }
        let mut actions = Vec::new();
        while self.at(TokenKind::Keyword(Keyword::Action)) {
            self.next();
            let Some(name) = self.ident("an action name") else {
                return false;
            };
            let Some(params) = self.type_list() else {
                return false;
            };
            if self.expect(TokenKind::Semicolon, "`;`").is_none() {
                return false;
            }
            actions.push((name, params));
        }
        if actions.is_empty() {
            self.error_here("an actuator must declare at least one action");
            return false;
        }
        if self.expect(TokenKind::RBrace, "`}`").is_none() {
            return false;
        }
        arch.actuators.push(RawActuator { id, actions });
        true
    }
}

fn describe(t: &Token) -> String {
    match t.kind {
        TokenKind::Eof => "end of input".to_string(),
        TokenKind::Ident => format!("`{}`", t.text),
        TokenKind::Keyword(k) => format!("keyword `{}`", k.as_str()),
        _ => format!("`{}`", t.text),
    }
}
