// function fake(x) {}
/*
function alsoFake(a, b) {}
*/
function real(a) { /* function inner() {} */ }
/** @param {string} name */
function documented(name) {}
