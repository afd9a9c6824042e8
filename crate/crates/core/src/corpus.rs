//! Seed contracts bundled with the crate.

/// `(file name, source)` pairs, sorted by file name.
pub const SEED_CORPUS: &[(&str, &str)] = &[
    ("auction.sol", include_str!("../corpus/auction.sol")),
    ("escrow.sol", include_str!("../corpus/escrow.sol")),
    ("game.sol", include_str!("../corpus/game.sol")),
    ("lottery.sol", include_str!("../corpus/lottery.sol")),
    ("multisig.sol", include_str!("../corpus/multisig.sol")),
    ("piggy_bank.sol", include_str!("../corpus/piggy_bank.sol")),
    ("registry.sol", include_str!("../corpus/registry.sol")),
    ("token.sol", include_str!("../corpus/token.sol")),
    ("vesting.sol", include_str!("../corpus/vesting.sol")),
    ("voting.sol", include_str!("../corpus/voting.sol")),
    ("wallet.sol", include_str!("../corpus/wallet.sol")),
];

/// Small two-player game contract, handy as a fixture.
pub const EGAME: &str = r#"pragma solidity >=0.4.21 <0.6.0;
contract EGame{
    address payable private winner;
    uint startTime;
    
    constructor() public{ 
      winner = msg.sender;
      startTime = block.timestamp;}
    
    function play(bytes32 guess) public {
     if(keccak256(abi.encode(guess)) == keccak256(abi.encode('solution'))){
        if (startTime + (5 * 1 days) == block.timestamp){
           winner = msg.sender;}}}
           
    function getReward() payable public{
      winner.transfer(msg.value);}
 }    
"#;
