//! Holds the `acceptance` test target, which runs the full pipeline at
//! production settings and prints one pass/fail line per criterion. It lives
//! in its own package so the rest of the workspace suite runs before it.
