const first = () => {
  return 1
}
function second(a) {
  return a
}
let third = x => x
function fourth() {}
