function $select(selector) {}
const _private = (value_1) => value_1;
function café(crème, brûlée) {}
