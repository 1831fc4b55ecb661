// SPDX-License-Identifier: Apache-2.0

//! Structural Verilog subset: one flat module, `input`/`output`/`wire`
//! declarations and cell instances with named port connections.

use super::{CellCatalog, GateInstance, Netlist, NetlistError, DEFAULT_CLOCK_PERIOD_NS};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> NetlistError {
    NetlistError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, NetlistError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split("//").next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: lineno + 1,
                    column,
                });
            } else if "(),;.".contains(c) {
                out.push(Spanned {
                    tok: Tok::Punct(c),
                    line: lineno + 1,
                    column,
                });
                i += 1;
            } else {
                return Err(syntax(
                    lineno + 1,
                    column,
                    format!("unexpected character `{c}`"),
                ));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.column)).unwrap_or(self.eof)
    }

    fn err(&self, message: impl Into<String>) -> NetlistError {
        let (l, c) = self.here();
        syntax(l, c, message)
    }

    fn ident(&mut self) -> Result<(String, usize, usize), NetlistError> {
        match self.peek().cloned() {
            Some(Spanned {
                tok: Tok::Ident(s),
                line,
                column,
            }) => {
                self.pos += 1;
                Ok((s, line, column))
            }
            _ => Err(self.err("expected identifier")),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), NetlistError> {
        match self.peek() {
            Some(Spanned {
                tok: Tok::Punct(p), ..
            }) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{c}`"))),
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Spanned { tok: Tok::Punct(p), .. }) if *p == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, NetlistError> {
        let mut out = vec![self.ident()?.0];
        while self.eat_punct(',') {
            out.push(self.ident()?.0);
        }
        Ok(out)
    }
}

/// Parses the structural subset and validates the result against `catalog`.
///
/// The clock period is set to [`DEFAULT_CLOCK_PERIOD_NS`]; callers override it
/// on the returned netlist when a constraint is known.
pub fn parse_structural(text: &str, catalog: &CellCatalog) -> Result<Netlist, NetlistError> {
    let toks = lex(text)?;
    let lines = text.lines().count().max(1);
    let mut p = Parser {
        toks,
        pos: 0,
        eof: (lines, text.lines().last().map(|l| l.len() + 1).unwrap_or(1)),
    };

    let (kw, ..) = p.ident()?;
    if kw != "module" {
        return Err(syntax(1, 1, "expected `module`"));
    }
    let (name, ..) = p.ident()?;
    p.punct('(')?;
    if !p.eat_punct(')') {
        p.ident_list()?;
        p.punct(')')?;
    }
    p.punct(';')?;

    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut gates = Vec::new();
    loop {
        let (word, ..) = p.ident()?;
        match word.as_str() {
            "endmodule" => break,
            "input" => {
                inputs.extend(p.ident_list()?);
                p.punct(';')?;
            }
            "output" => {
                outputs.extend(p.ident_list()?);
                p.punct(';')?;
            }
            "wire" => {
                p.ident_list()?;
                p.punct(';')?;
            }
            _ => {
                let kind = catalog
                    .get(&word)
                    .ok_or_else(|| NetlistError::UnknownCell(word.clone()))?;
                let (inst, ..) = p.ident()?;
                p.punct('(')?;
                let mut conns: Vec<(String, String)> = Vec::new();
                loop {
                    p.punct('.')?;
                    let (pin, ..) = p.ident()?;
                    p.punct('(')?;
                    let (net, ..) = p.ident()?;
                    p.punct(')')?;
                    if conns.iter().any(|(q, _)| *q == pin) {
                        return Err(NetlistError::Pins {
                            instance: inst,
                            message: format!("pin {pin} connected twice"),
                        });
                    }
                    conns.push((pin, net));
                    if !p.eat_punct(',') {
                        break;
                    }
                }
                p.punct(')')?;
                p.punct(';')?;
                let mut take = |pin: &str| -> Result<String, NetlistError> {
                    let at = conns.iter().position(|(q, _)| q == pin).ok_or_else(|| {
                        NetlistError::Pins {
                            instance: inst.clone(),
                            message: format!("missing pin {pin}"),
                        }
                    })?;
                    Ok(conns.remove(at).1)
                };
                let input_nets = kind
                    .input_pin_names()
                    .iter()
                    .map(|pin| take(pin))
                    .collect::<Result<Vec<_>, _>>()?;
                let output = take(kind.output_pin_name())?;
                if let Some((pin, _)) = conns.first() {
                    return Err(NetlistError::Pins {
                        instance: inst,
                        message: format!("unknown pin {pin} on {}", kind.name),
                    });
                }
                gates.push(GateInstance {
                    name: inst,
                    kind: kind.name.clone(),
                    inputs: input_nets,
                    output,
                });
            }
        }
    }
    if p.peek().is_some() {
        return Err(p.err("text after `endmodule`"));
    }

    let netlist = Netlist {
        name,
        clock_period_ns: DEFAULT_CLOCK_PERIOD_NS,
        primary_inputs: inputs,
        primary_outputs: outputs,
        gates,
    };
    netlist.validate(catalog)?;
    Ok(netlist)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_GATES: &str = "module m(a,b,y); input a,b; output y; wire w; \
        INV g1(.A(a),.Y(w)); NAND2 g2(.A(w),.B(b),.Y(y)); endmodule";

    #[test]
    fn two_gate_module() {
        let n = parse_structural(TWO_GATES, &CellCatalog::default()).unwrap();
        assert_eq!(n.name, "m");
        assert_eq!(n.gates.len(), 2);
        assert_eq!(n.primary_inputs, ["a", "b"]);
        assert_eq!(n.primary_outputs, ["y"]);
        assert_eq!(n.gates[1].inputs, ["w", "b"]);
    }

    #[test]
    fn pin_order_follows_kind_not_text() {
        let t = "module m(a,b,y); input a,b; output y; NAND2 g(.Y(y),.B(b),.A(a)); endmodule";
        let n = parse_structural(t, &CellCatalog::default()).unwrap();
        assert_eq!(n.gates[0].inputs, ["a", "b"]);
    }

    #[test]
    fn unknown_cell() {
        let t = TWO_GATES.replace("INV g1", "INVX g1");
        assert_eq!(
            parse_structural(&t, &CellCatalog::default()),
            Err(NetlistError::UnknownCell("INVX".into()))
        );
    }

    #[test]
    fn multiple_drivers() {
        let t = "module m(a,b,y); input a,b; output y; wire w;\n\
                 INV g1(.A(a),.Y(w));\nINV g3(.A(b),.Y(w));\n\
                 NAND2 g2(.A(w),.B(b),.Y(y));\nendmodule";
        assert_eq!(
            parse_structural(t, &CellCatalog::default()),
            Err(NetlistError::MultipleDrivers("w".into()))
        );
    }

    #[test]
    fn syntax_error_position() {
        let t = "module m(a);\ninput a;\nINV g1(.A(a) .Y(b));\nendmodule";
        match parse_structural(t, &CellCatalog::default()) {
            Err(NetlistError::Syntax { line, column, .. }) => assert_eq!((line, column), (3, 14)),
            other => panic!("{other:?}"),
        }
        let t = "module m(a); input a; output a$;";
        assert!(matches!(
            parse_structural(t, &CellCatalog::default()),
            Err(NetlistError::Syntax {
                line: 1,
                column: 31,
                ..
            })
        ));
    }

    #[test]
    fn comments_and_flip_flops() {
        let t = "// header\nmodule m(d, q); // ports\ninput d; output q;\n\
                 DFF r(.D(d), .Q(q)); // register\nendmodule\n";
        let n = parse_structural(t, &CellCatalog::default()).unwrap();
        assert_eq!(n.gates[0].kind, "DFF");
        assert_eq!(n.gates[0].inputs, ["d"]);
        assert_eq!(n.gates[0].output, "q");
    }

    #[test]
    fn missing_and_unknown_pins() {
        let t = "module m(a,y); input a; output y; NAND2 g(.A(a),.Y(y)); endmodule";
        assert!(matches!(
            parse_structural(t, &CellCatalog::default()),
            Err(NetlistError::Pins { .. })
        ));
        let t = "module m(a,y); input a; output y; INV g(.A(a),.Z(a),.Y(y)); endmodule";
        assert!(matches!(
            parse_structural(t, &CellCatalog::default()),
            Err(NetlistError::Pins { .. })
        ));
    }

    #[test]
    fn undriven_input_net() {
        let t = "module m(a,y); input a; output y; NAND2 g(.A(a),.B(ghost),.Y(y)); endmodule";
        assert_eq!(
            parse_structural(t, &CellCatalog::default()),
            Err(NetlistError::UndrivenNet("ghost".into()))
        );
    }
}
