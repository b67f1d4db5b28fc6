"""The published grammar and query-API reference.

Both strings are embedded into generation prompts and shipped under docs/;
a test keeps the docs copy in sync.
"""

GRAMMAR_EBNF = """\
program    = { check } ;
check      = "check" ident "covers" ident "type" anomaly
             "when" expr "reason" string [ "with" bindings ] ;
anomaly    = "Quantity" | "Size" | "Position" | "Matching" ;
bindings   = binding { "," binding } ;
binding    = ident "=" expr ;
expr       = quantified | letexpr | disjunct ;
quantified = ( "forall" | "exists" ) ident "in" disjunct ":" expr ;
letexpr    = "let" ident "=" disjunct "in" expr ;
disjunct   = conjunct { "or" conjunct } ;
conjunct   = negation { "and" negation } ;
negation   = "not" negation | comparison ;
comparison = sum [ cmpop sum | "in" "[" expr "," expr "]" ] ;
cmpop      = "<" | "<=" | "=" | "!=" | ">=" | ">" ;
sum        = term { ( "+" | "-" ) term } ;
term       = unary { ( "*" | "/" ) unary } ;
unary      = "-" unary | postfix ;
postfix    = primary { "." ident | "[" expr "]" } ;
primary    = int | float | string | "true" | "false"
           | ident [ "(" [ expr { "," expr } ] ")" ] | "(" expr ")" ;
"""

API_REFERENCE = """\
Queries available inside expressions (names are object-class strings):
  count(name)            -> int     number of objects with that name
  find(name)             -> list    those objects, in annotation order
  size(obj)              -> record  .area and .length (both float, pixels)
  size(name, i)          -> record  shorthand for size(find(name)[i])
  position(obj|name, i)  -> record  .x and .y of the object centroid
  color(obj|name, i)     -> record  .name, one of: red, green, blue, yellow,
                                    orange, purple, brown, black, white, gray
  order(name, axis)      -> list    objects sorted by centroid on axis "x"/"y"
  nearest(obj|name,i, n) -> object  closest object named n
  overlaps(a, b)         -> bool    bounding boxes of objects a and b overlap
Range tests are inclusive: x in [lo, hi] means lo <= x <= hi.
Quantifiers iterate object lists: forall o in find("cable"): <bool expr>.
"""
