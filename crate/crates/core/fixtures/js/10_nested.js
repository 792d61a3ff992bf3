function outer(a) {
  function inner(b) {}
  const helper = (c) => c;
  return inner(helper(a));
}
const wrapper = () => {
  function hidden() {}
};
