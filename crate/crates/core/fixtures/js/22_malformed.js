function before(a) {}
}
const s = "unterminated
function afterString(d) {}
function broken(x, y {
